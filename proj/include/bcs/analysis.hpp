#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "bcs/scalar.hpp"
#include "bcs/sensing.hpp"

namespace bcs {

/// Largest absolute inner product between distinct normalized columns.
/// Computed from the normalized Gram matrix in column chunks so memory stays
/// O(n * chunk) even for wide matrices.
template <Scalar T>
double mutual_coherence(const Matrix<T>& a) {
  const Eigen::Index n = a.cols();
  if (a.rows() < 1 || n < 2) {
    throw std::invalid_argument("mutual_coherence: need >= 2 columns");
  }

  Matrix<T> an = a;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double norm = an.col(j).norm();
    if (norm <= 0) {
      throw std::invalid_argument("mutual_coherence: zero column");
    }
    an.col(j) /= norm;
  }

  double mu = 0.0;
  const Eigen::Index chunk = 256;
  for (Eigen::Index j0 = 0; j0 < n; j0 += chunk) {
    const Eigen::Index w = std::min(chunk, n - j0);
    Matrix<T> g = an.adjoint() * an.middleCols(j0, w);
    for (Eigen::Index c = 0; c < w; ++c) {
      for (Eigen::Index r = 0; r < n; ++r) {
        if (r == j0 + c) continue;
        mu = std::max(mu, static_cast<double>(std::abs(g(r, c))));
      }
    }
  }
  return std::min(mu, 1.0);  // unit-norm columns; shave rounding overshoot
}

/// Coherence of the block-diagonal operator. Columns living in different
/// blocks have disjoint supports, so their inner products vanish and the
/// overall coherence is the worst block's.
template <Scalar T>
double block_coherence(const BlockSensor<T>& sensor) {
  if (sensor.block_cols() < 2) {
    throw std::invalid_argument("block_coherence: degenerate block");
  }
  double mu = 0.0;
  for (int b = 0; b < sensor.num_blocks(); ++b) {
    mu = std::max(mu, mutual_coherence(sensor.block(b)));
  }
  return mu;
}

/// Lower bound on the coherence of any m x n frame:
/// sqrt((n - m) / (m (n - 1))). Zero at m = n, one at m = 1.
inline double welch_bound(std::int64_t m, std::int64_t n) {
  if (m < 1 || n < m || n < 2) {
    throw std::invalid_argument("welch_bound: need 1 <= m <= n, n >= 2");
  }
  const std::int64_t num = n - m;
  const std::int64_t den = m * (n - 1);
  return std::sqrt(static_cast<double>(num) / static_cast<double>(den));
}

/// Coherence floor for a block-diagonal operator with beta equal blocks:
/// sqrt((n - m) / (m (n/beta - 1))). Equals welch_bound(m/beta, n/beta); the
/// all-integer numerator/denominator keep the two expressions equal in
/// floating point, not just analytically, since the shared factor beta
/// cancels exactly in the correctly-rounded division.
inline double bcs_welch_bound(std::int64_t m, std::int64_t n, std::int64_t beta) {
  if (beta < 1) throw std::invalid_argument("bcs_welch_bound: beta < 1");
  if (m % beta != 0 || n % beta != 0) {
    throw std::invalid_argument("bcs_welch_bound: beta must divide m and n");
  }
  if (m < 1 || n <= m) {
    throw std::invalid_argument("bcs_welch_bound: need 1 <= m < n");
  }
  if (n / beta < 2) {
    throw std::invalid_argument("bcs_welch_bound: need n/beta >= 2");
  }
  const std::int64_t num = n - m;
  const std::int64_t den = m * (n / beta - 1);
  return std::sqrt(static_cast<double>(num) / static_cast<double>(den));
}

/// Parameters of the worst-case OMP error guarantee.
struct BoundParams {
  int s = 1;           // sparsity level
  double sigma = 1.0;  // per-measurement noise std
  double alpha = 0.5;  // bound constant
  double m = 1.0;      // measurement count (real-valued: enters only via ln m)
  std::int64_t n = 2;  // ambient dimension
};

/// Worst-case OMP squared-error guarantee at coherence mu:
///   2 (1 + alpha) s sigma^2 ln(m) / (1 - (s-1) mu)^2.
/// Only meaningful while (s-1) mu < 1; outside that region the guarantee is
/// void and this throws rather than returning a negative or infinite value.
inline double omp_mse_bound(const BoundParams& p, double mu) {
  if (p.s < 1 || p.m < 1) {
    throw std::invalid_argument("omp_mse_bound: need s >= 1, m >= 1");
  }
  if (mu < 0 || p.sigma < 0 || p.alpha < 0) {
    throw std::invalid_argument("omp_mse_bound: negative parameter");
  }
  const double gap = 1.0 - (p.s - 1) * mu;
  if (gap <= 0) {
    throw std::domain_error("omp_mse_bound: (s-1) mu >= 1, guarantee void");
  }
  return 2.0 * (1.0 + p.alpha) * p.s * p.sigma * p.sigma * std::log(p.m) /
         (gap * gap);
}

inline std::optional<double> try_omp_mse_bound(const BoundParams& p, double mu) {
  if (1.0 - (p.s - 1) * mu <= 0) return std::nullopt;
  return omp_mse_bound(p, mu);
}

/// One point of the bound-vs-beta trade-off curve.
struct BoundPoint {
  std::int64_t beta = 1;
  double mu_lower_bound = 0.0;      // bcs_welch_bound at this beta
  std::optional<double> mse_upper_bound;  // omp_mse_bound at that floor
};

/// Coherence floor and the induced worst-case MSE guarantee for each beta.
/// Betas must divide both m and n (with p.m integral). Where the floor
/// already voids the OMP guarantee, mse_upper_bound is left empty.
inline std::vector<BoundPoint> bound_curve(const BoundParams& p,
                                           const std::vector<std::int64_t>& betas) {
  const auto m = static_cast<std::int64_t>(p.m);
  if (static_cast<double>(m) != p.m) {
    throw std::invalid_argument("bound_curve: m must be integral");
  }
  std::vector<BoundPoint> pts;
  pts.reserve(betas.size());
  for (std::int64_t beta : betas) {
    BoundPoint pt;
    pt.beta = beta;
    pt.mu_lower_bound = bcs_welch_bound(m, p.n, beta);
    pt.mse_upper_bound = try_omp_mse_bound(p, pt.mu_lower_bound);
    pts.push_back(pt);
  }
  return pts;
}

}  // namespace bcs
