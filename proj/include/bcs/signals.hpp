#pragma once

#include <algorithm>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "bcs/rng.hpp"
#include "bcs/scalar.hpp"
#include "bcs/shape.hpp"
#include "bcs/tensor.hpp"

namespace bcs {

enum class Amplitude {
  kUnit,      // +-1 (real) or unit-modulus random phase (complex)
  kGaussian,  // standard (circularly symmetric) Gaussian
};

inline std::string to_string(Amplitude a) {
  return a == Amplitude::kUnit ? "unit" : "gaussian";
}

inline Amplitude amplitude_from_string(const std::string& s) {
  if (s == "unit") return Amplitude::kUnit;
  if (s == "gaussian" || s == "complex-gaussian") return Amplitude::kGaussian;
  throw std::invalid_argument("unknown amplitude distribution: " + s);
}

/// Synthetic clustered-sparse signal: `num_clusters` connected bumps, each a
/// random connected subset of a Chebyshev ball, targeting `sparsity` active
/// entries in total.
struct ClusterSpec {
  Shape shape;
  int num_clusters = 1;
  int cluster_radius = 1;  // Chebyshev radius of each cluster's ball
  int sparsity = 1;        // target total number of active entries
  Amplitude amplitude = Amplitude::kGaussian;
  std::uint64_t seed = 0;

  void validate() const {
    if (num_clusters < 1) throw std::invalid_argument("ClusterSpec: clusters < 1");
    if (cluster_radius < 0) throw std::invalid_argument("ClusterSpec: radius < 0");
    if (sparsity < 1) throw std::invalid_argument("ClusterSpec: sparsity < 1");
    if (sparsity > shape.size() / 4) {
      throw std::invalid_argument("ClusterSpec: sparsity above n/4");
    }
    for (int l = 0; l < shape.order(); ++l) {
      if (2 * cluster_radius + 1 > shape.dim(l)) {
        throw std::invalid_argument("ClusterSpec: radius exceeds shape");
      }
    }
  }
};

namespace detail {

/// Connected random subset of the Chebyshev ball around `center`: grow from
/// the center, each step activating a uniformly chosen in-ball neighbor of
/// the current set.
inline void grow_cluster(const Shape& shape, const MultiIndex& center,
                         int radius, int quota, Rng& rng,
                         std::set<std::int64_t>& support) {
  const int d = shape.order();
  const Shape offsets(std::vector<int>(static_cast<std::size_t>(d), 3));
  std::set<std::int64_t> visited;
  std::vector<std::int64_t> frontier;

  auto in_ball = [&](const MultiIndex& idx) {
    for (int l = 0; l < d; ++l) {
      const int delta = idx[static_cast<std::size_t>(l)] -
                        center[static_cast<std::size_t>(l)];
      if (delta < -radius || delta > radius) return false;
    }
    return true;
  };
  auto push_neighbors = [&](const MultiIndex& at) {
    for_each_index(offsets, [&](const MultiIndex& off) {
      MultiIndex nb(static_cast<std::size_t>(d));
      bool ok = true;
      for (int l = 0; l < d; ++l) {
        const int z = at[static_cast<std::size_t>(l)] +
                      off[static_cast<std::size_t>(l)] - 1;
        if (z < 0 || z >= shape.dim(l)) {
          ok = false;
          break;
        }
        nb[static_cast<std::size_t>(l)] = z;
      }
      if (!ok || !in_ball(nb)) return;
      const std::int64_t flat = shape.flat_index(nb);
      if (visited.insert(flat).second) frontier.push_back(flat);
    });
  };

  const std::int64_t c0 = shape.flat_index(center);
  visited.insert(c0);
  support.insert(c0);
  push_neighbors(center);
  for (int taken = 1; taken < quota && !frontier.empty(); ++taken) {
    const std::size_t at = static_cast<std::size_t>(
        rng.below(static_cast<std::uint64_t>(frontier.size())));
    const std::int64_t flat = frontier[at];
    frontier[at] = frontier.back();
    frontier.pop_back();
    support.insert(flat);
    push_neighbors(shape.multi_index(flat));
  }
}

}  // namespace detail

template <Scalar T>
Tensor<T> generate_clustered(const ClusterSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const Shape& shape = spec.shape;
  const int d = shape.order();

  std::set<std::int64_t> support;
  for (int c = 0; c < spec.num_clusters; ++c) {
    // Spread the target sparsity evenly, remainder to the first clusters.
    const int quota = spec.sparsity / spec.num_clusters +
                      (c < spec.sparsity % spec.num_clusters ? 1 : 0);
    if (quota == 0) continue;
    // Center placed so the full ball is in bounds, keeping cluster sizes
    // homogeneous (growth is never clipped at an edge).
    MultiIndex center(static_cast<std::size_t>(d));
    for (int l = 0; l < d; ++l) {
      const int lo = spec.cluster_radius;
      const int hi = shape.dim(l) - spec.cluster_radius;  // exclusive
      center[static_cast<std::size_t>(l)] =
          lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(hi - lo)));
    }
    detail::grow_cluster(shape, center, spec.cluster_radius, quota, rng,
                         support);
  }

  Tensor<T> x(shape);
  for (std::int64_t flat : support) {
    x[flat] = spec.amplitude == Amplitude::kUnit ? rng.unit_amplitude<T>()
                                                 : rng.standard_gaussian<T>();
  }
  return x;
}

/// NMSE across a trial set: sum of squared errors over sum of squared
/// reference norms (ratio of empirical means, not mean of per-trial ratios).
template <Scalar T>
class NmseAccumulator {
 public:
  void add(const Tensor<T>& x, const Tensor<T>& x_hat) {
    err_ += static_cast<double>(distance_sq(x, x_hat));
    ref_ += static_cast<double>(x.frobenius_sq());
    ++trials_;
  }

  void add_raw(double err_sq, double ref_sq) {
    err_ += err_sq;
    ref_ += ref_sq;
    ++trials_;
  }

  int trials() const { return trials_; }
  double error_energy() const { return err_; }
  double reference_energy() const { return ref_; }

  double value() const {
    if (trials_ == 0 || ref_ <= 0) {
      throw std::domain_error("NmseAccumulator: no nonzero reference signal");
    }
    return err_ / ref_;
  }

 private:
  double err_ = 0;
  double ref_ = 0;
  int trials_ = 0;
};

/// Single-pair NMSE.
template <Scalar T>
double nmse(const Tensor<T>& x, const Tensor<T>& x_hat) {
  NmseAccumulator<T> acc;
  acc.add(x, x_hat);
  return acc.value();
}

}  // namespace bcs
