#pragma once

#include <Eigen/Dense>
#include <atomic>
#include <chrono>
#include <cmath>
#include <iostream>
#include <limits>
#include <optional>
#include <stdexcept>
#include <thread>
#include <vector>

#include "bcs/kernel.hpp"
#include "bcs/partition.hpp"
#include "bcs/scalar.hpp"
#include "bcs/sensing.hpp"
#include "bcs/tensor.hpp"

namespace bcs {

struct RecoveryConfig {
  int max_iters = 1;                // per-block atom budget
  double residual_tol_factor = 1.0; // stop when ||r|| <= factor * sigma * sqrt(m_b)
  double logit_scale = 1.0;         // lambda multiplying the prior term
  double prior_clip = 1e-3;         // epsilon clipping priors into [eps, 1-eps]
  double noise_var = 0.0;           // sigma^2 the solver assumes

  void validate(Eigen::Index block_rows) const {
    if (max_iters < 1 || max_iters > block_rows) {
      throw std::invalid_argument(
          "RecoveryConfig: need 1 <= max_iters <= block measurement count");
    }
    if (!(prior_clip > 0 && prior_clip < 0.5)) {
      throw std::invalid_argument("RecoveryConfig: prior_clip outside (0, 0.5)");
    }
    if (residual_tol_factor < 0 || noise_var < 0 || logit_scale < 0) {
      throw std::invalid_argument("RecoveryConfig: negative parameter");
    }
  }
};

/// Per-entry nonnegative score proportional to the probability that the
/// entry is active. Unnormalized: updates may push entries past 1, and the
/// logit weighting clips at use time.
struct SupportPrior {
  Tensor<double> values;

  static SupportPrior uniform(const Shape& shape, double s_avg) {
    if (s_avg <= 0) throw std::invalid_argument("SupportPrior: s_avg <= 0");
    SupportPrior p{Tensor<double>(shape)};
    const double v = s_avg / static_cast<double>(shape.size());
    for (std::int64_t i = 0; i < p.values.size(); ++i) p.values[i] = v;
    return p;
  }
};

template <Scalar T>
struct BlockSolve {
  Vector<T> x;                          // dense estimate, length n_b
  std::vector<Eigen::Index> support;    // atoms in selection order
  double residual_norm = 0.0;
  int iterations = 0;
  bool ok = true;
};

namespace detail {

/// Greedy pursuit shared by OMP and LW-OMP. Selects the column maximizing
/// |<a_k, r>|^2 + bonus_k, refits by least squares on the selected set, and
/// repeats. bonus = nullptr means classical OMP; LW-OMP passes the scaled,
/// max-shifted prior logits, which are identically zero for a uniform prior
/// so both solvers follow bit-identical score paths.
template <Scalar T>
BlockSolve<T> greedy_pursuit(const Vector<T>& y, const Matrix<T>& a,
                             const Eigen::VectorXd* bonus,
                             const RecoveryConfig& cfg) {
  const Eigen::Index mb = a.rows();
  const Eigen::Index nb = a.cols();
  if (y.size() != mb) throw std::invalid_argument("greedy_pursuit: dim mismatch");
  if (bonus && bonus->size() != nb) {
    throw std::invalid_argument("greedy_pursuit: bonus length mismatch");
  }
  cfg.validate(mb);
  const int budget = static_cast<int>(
      std::min<Eigen::Index>(cfg.max_iters, nb));
  const double sigma = std::sqrt(cfg.noise_var);
  const double tol =
      cfg.residual_tol_factor * sigma * std::sqrt(static_cast<double>(mb));

  BlockSolve<T> out;
  out.x = Vector<T>::Zero(nb);
  Vector<T> r = y;
  double r_norm = r.norm();
  std::vector<bool> unavailable(static_cast<std::size_t>(nb), false);
  Matrix<T> a_sel(mb, budget);
  Vector<T> coeffs;

  while (out.iterations < budget && r_norm > tol) {
    const Vector<T> corr = a.adjoint() * r;

    // Re-run selection if the chosen column turns out linearly dependent.
    Eigen::Index pick = -1;
    while (true) {
      double best = -std::numeric_limits<double>::infinity();
      pick = -1;
      for (Eigen::Index k = 0; k < nb; ++k) {
        if (unavailable[static_cast<std::size_t>(k)]) continue;
        double score = abs_sq(corr(k));
        if (bonus) score += (*bonus)(k);
        if (score > best) {
          best = score;
          pick = k;
        }
      }
      if (pick < 0) break;  // every column selected or banned

      const Eigen::Index s = static_cast<Eigen::Index>(out.support.size());
      a_sel.col(s) = a.col(pick);
      Eigen::ColPivHouseholderQR<Matrix<T>> qr(a_sel.leftCols(s + 1));
      if (qr.rank() < s + 1) {
        std::cerr << "greedy_pursuit: column " << pick
                  << " is dependent on the selected set, skipping\n";
        unavailable[static_cast<std::size_t>(pick)] = true;
        continue;
      }
      coeffs = qr.solve(y);
      break;
    }
    if (pick < 0) break;

    out.support.push_back(pick);
    unavailable[static_cast<std::size_t>(pick)] = true;
    const Eigen::Index s = static_cast<Eigen::Index>(out.support.size());
    r = y - a_sel.leftCols(s) * coeffs;
    const double new_norm = r.norm();
    if (new_norm > r_norm * (1.0 + 1e-9) + 1e-12) {
      throw std::logic_error("greedy_pursuit: residual norm increased");
    }
    r_norm = new_norm;
    ++out.iterations;
  }

  for (std::size_t i = 0; i < out.support.size(); ++i) {
    out.x(out.support[i]) = coeffs(static_cast<Eigen::Index>(i));
  }
  out.residual_norm = r_norm;
  return out;
}

inline double logit(double p) { return std::log(p / (1.0 - p)); }

/// Scaled prior logits shifted so the largest is zero. The shift keeps the
/// argmax and makes a uniform prior contribute exactly nothing.
inline Eigen::VectorXd prior_bonus(const std::vector<double>& prior,
                                   double noise_var,
                                   const RecoveryConfig& cfg) {
  Eigen::VectorXd b(static_cast<Eigen::Index>(prior.size()));
  const double eps = cfg.prior_clip;
  for (std::size_t k = 0; k < prior.size(); ++k) {
    if (prior[k] < 0) {
      throw std::invalid_argument("lw_omp: negative prior entry");
    }
    const double p = std::min(std::max(prior[k], eps), 1.0 - eps);
    b(static_cast<Eigen::Index>(k)) = cfg.logit_scale * noise_var * logit(p);
  }
  const double top = b.maxCoeff();
  for (Eigen::Index k = 0; k < b.size(); ++k) b(k) -= top;
  return b;
}

}  // namespace detail

/// Classical orthogonal matching pursuit on one measurement block.
template <Scalar T>
BlockSolve<T> omp(const Vector<T>& y, const Matrix<T>& a,
                  const RecoveryConfig& cfg) {
  return detail::greedy_pursuit(y, a, nullptr, cfg);
}

/// Logit-weighted OMP: atom selection maximizes
/// |<a_k, r>|^2 + lambda sigma^2 logit(p_k) with p_k the clipped prior entry.
/// Refit and stopping are identical to omp; noise_var is the sigma^2 handed
/// to the solver alongside the prior.
template <Scalar T>
BlockSolve<T> lw_omp(const Vector<T>& y, const Matrix<T>& a,
                     const Tensor<double>& prior_block, double noise_var,
                     const RecoveryConfig& cfg) {
  if (prior_block.size() != a.cols()) {
    throw std::invalid_argument("lw_omp: prior size mismatch");
  }
  if (noise_var < 0) throw std::invalid_argument("lw_omp: noise_var < 0");
  RecoveryConfig c = cfg;
  c.noise_var = noise_var;
  const Eigen::VectorXd bonus =
      detail::prior_bonus(prior_block.data(), noise_var, c);
  return detail::greedy_pursuit(y, a, &bonus, c);
}

template <Scalar T>
struct RecoveryResult {
  Tensor<T> x_hat;
  std::vector<std::vector<Eigen::Index>> supports;  // indexed by block id
  std::vector<double> residual_norms;               // indexed by block id
  std::vector<int> iterations;                      // indexed by block id
  std::vector<int> block_order;                     // order blocks were solved
  std::vector<double> block_ms;                     // wall clock per block
  std::vector<char> block_ok;                       // indexed by block id
  Tensor<double> final_prior;  // serial solver only: prior after the last block
};

namespace detail {

template <Scalar T>
void check_problem(const MeasurementSet<T>& ms, const BlockSensor<T>& sensor,
                   const PartitionMap& map) {
  if (ms.num_blocks() != sensor.num_blocks() ||
      sensor.num_blocks() != map.num_blocks() ||
      sensor.block_cols() != map.block_size()) {
    throw std::invalid_argument("recovery: measurements/sensor/partition mismatch");
  }
  for (const auto& yb : ms.y) {
    if (yb.size() != sensor.block_rows()) {
      throw std::invalid_argument("recovery: measurement length mismatch");
    }
  }
}

template <Scalar T>
RecoveryResult<T> make_result(const PartitionMap& map) {
  const auto beta = static_cast<std::size_t>(map.num_blocks());
  RecoveryResult<T> res;
  res.x_hat = Tensor<T>(map.spec().shape);
  res.supports.resize(beta);
  res.residual_norms.assign(beta, 0.0);
  res.iterations.assign(beta, 0);
  res.block_ms.assign(beta, 0.0);
  res.block_ok.assign(beta, 1);
  return res;
}

inline double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now() - t0)
      .count();
}

}  // namespace detail

/// Standard BCS: every block solved independently by omp. Blocks may run
/// concurrently (they share no mutable state); the result does not depend on
/// the processing order. A block whose solver throws is reported failed and
/// left zero.
template <Scalar T>
RecoveryResult<T> parallel_bcs(const MeasurementSet<T>& ms,
                               const BlockSensor<T>& sensor,
                               const PartitionMap& map,
                               const RecoveryConfig& cfg, int num_threads = 0) {
  detail::check_problem(ms, sensor, map);
  const int beta = map.num_blocks();
  RecoveryResult<T> res = detail::make_result<T>(map);
  std::vector<Vector<T>> block_x(static_cast<std::size_t>(beta));

  const int workers = num_threads > 0
                          ? std::min(num_threads, beta)
                          : std::min<int>(static_cast<int>(
                                              std::thread::hardware_concurrency()),
                                          beta);
  std::atomic<int> next{0};
  auto run = [&]() {
    for (int b = next.fetch_add(1); b < beta; b = next.fetch_add(1)) {
      const auto t0 = std::chrono::steady_clock::now();
      try {
        BlockSolve<T> sol = omp(ms.y[static_cast<std::size_t>(b)],
                                sensor.block(b), cfg);
        block_x[static_cast<std::size_t>(b)] = std::move(sol.x);
        res.supports[static_cast<std::size_t>(b)] = std::move(sol.support);
        res.residual_norms[static_cast<std::size_t>(b)] = sol.residual_norm;
        res.iterations[static_cast<std::size_t>(b)] = sol.iterations;
      } catch (const std::exception& e) {
        std::cerr << "parallel_bcs: block " << b << " failed: " << e.what()
                  << "\n";
        res.block_ok[static_cast<std::size_t>(b)] = 0;
      }
      res.block_ms[static_cast<std::size_t>(b)] = detail::ms_since(t0);
    }
  };

  if (workers <= 1) {
    run();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(run);
    for (auto& th : pool) th.join();
  }

  const Shape block_shape = map.block_shape();
  for (int b = 0; b < beta; ++b) {
    res.block_order.push_back(b);
    if (!res.block_ok[static_cast<std::size_t>(b)]) continue;
    const auto& xb = block_x[static_cast<std::size_t>(b)];
    std::vector<T> data(xb.data(), xb.data() + xb.size());
    map.scatter_into(Tensor<T>(block_shape, std::move(data)), b, res.x_hat);
  }
  return res;
}

/// Data-driven serial BCS. Starts from the uniform prior s/n, solves block 1
/// first, and after each block adds the same-centered convolution of the
/// reconstructed magnitudes with the learned kernel to the prior. The next
/// block is the unsolved one whose prior mass is largest (ties to the lowest
/// id). A failed block is left zero and contributes nothing to the prior.
template <Scalar T>
RecoveryResult<T> serial_bcs(const MeasurementSet<T>& ms,
                             const BlockSensor<T>& sensor,
                             const PartitionMap& map,
                             const CorrelationKernel& kernel, double s_avg,
                             const RecoveryConfig& cfg) {
  detail::check_problem(ms, sensor, map);
  if (kernel.order() != map.spec().shape.order()) {
    throw std::invalid_argument("serial_bcs: kernel order mismatch");
  }
  const int beta = map.num_blocks();
  const Shape block_shape = map.block_shape();
  RecoveryResult<T> res = detail::make_result<T>(map);
  SupportPrior prior = SupportPrior::uniform(map.spec().shape, s_avg);

  std::vector<bool> solved(static_cast<std::size_t>(beta), false);
  int b = 0;  // block 1 first
  for (int step = 0; step < beta; ++step) {
    const auto t0 = std::chrono::steady_clock::now();
    bool update_prior = true;
    Tensor<T> xb_tensor(block_shape);
    try {
      BlockSolve<T> sol =
          lw_omp(ms.y[static_cast<std::size_t>(b)], sensor.block(b),
                 map.gather_block(prior.values, b), cfg.noise_var, cfg);
      std::vector<T> data(sol.x.data(), sol.x.data() + sol.x.size());
      xb_tensor = Tensor<T>(block_shape, std::move(data));
      map.scatter_into(xb_tensor, b, res.x_hat);
      res.supports[static_cast<std::size_t>(b)] = std::move(sol.support);
      res.residual_norms[static_cast<std::size_t>(b)] = sol.residual_norm;
      res.iterations[static_cast<std::size_t>(b)] = sol.iterations;
    } catch (const std::exception& e) {
      std::cerr << "serial_bcs: block " << b << " failed: " << e.what() << "\n";
      res.block_ok[static_cast<std::size_t>(b)] = 0;
      update_prior = false;
    }

    if (update_prior) {
      const Tensor<real_t<T>> ext_mag =
          magnitudes(map.scatter_block(xb_tensor, b));
      prior.values += convolve(ext_mag, kernel.values, ConvMode::kSameCentered);
    }

    res.block_order.push_back(b);
    solved[static_cast<std::size_t>(b)] = true;
    res.block_ms[static_cast<std::size_t>(b)] = detail::ms_since(t0);

    // Next block: the unsolved one with the most prior mass.
    double best = -std::numeric_limits<double>::infinity();
    int next_b = -1;
    for (int k = 0; k < beta; ++k) {
      if (solved[static_cast<std::size_t>(k)]) continue;
      const Tensor<double> pk = map.gather_block(prior.values, k);
      double mass = 0;
      for (std::int64_t i = 0; i < pk.size(); ++i) mass += pk[i];
      if (mass > best) {
        best = mass;
        next_b = k;
      }
    }
    if (next_b < 0) break;
    b = next_b;
  }
  res.final_prior = std::move(prior.values);
  return res;
}

}  // namespace bcs
