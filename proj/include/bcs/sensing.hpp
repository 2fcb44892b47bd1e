#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "bcs/partition.hpp"
#include "bcs/rng.hpp"
#include "bcs/scalar.hpp"

namespace bcs {

template <Scalar T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <Scalar T>
using Vector = Eigen::Matrix<T, Eigen::Dynamic, 1>;

/// Block-diagonal sensing operator: beta dense blocks of shape
/// (m/beta) x (n/beta) on the diagonal, zeros elsewhere. Only the blocks are
/// stored — m*n/beta scalars instead of m*n.
template <Scalar T>
class BlockSensor {
 public:
  BlockSensor(int m, std::int64_t n, std::vector<Matrix<T>> blocks,
              std::string ensemble, std::uint64_t seed)
      : m_(m),
        n_(n),
        blocks_(std::move(blocks)),
        ensemble_(std::move(ensemble)),
        seed_(seed) {
    const int beta = static_cast<int>(blocks_.size());
    if (beta < 1) throw std::invalid_argument("BlockSensor: no blocks");
    if (m % beta != 0 || n % beta != 0) {
      throw std::invalid_argument("BlockSensor: beta must divide m and n");
    }
    const Eigen::Index mb = m / beta;
    const Eigen::Index nb = static_cast<Eigen::Index>(n / beta);
    std::int64_t stored = 0;
    for (const auto& a : blocks_) {
      if (a.rows() != mb || a.cols() != nb) {
        throw std::invalid_argument("BlockSensor: inconsistent block shape");
      }
      if (!a.allFinite()) {
        throw std::invalid_argument("BlockSensor: non-finite entries");
      }
      stored += static_cast<std::int64_t>(a.size());
    }
    if (stored * beta != static_cast<std::int64_t>(m) * n) {
      throw std::logic_error("BlockSensor: storage bookkeeping broken");
    }
  }

  int m() const { return m_; }
  std::int64_t n() const { return n_; }
  int num_blocks() const { return static_cast<int>(blocks_.size()); }
  int block_rows() const { return m_ / num_blocks(); }
  std::int64_t block_cols() const { return n_ / num_blocks(); }
  const std::string& ensemble() const { return ensemble_; }
  std::uint64_t seed() const { return seed_; }

  const Matrix<T>& block(int b) const {
    return blocks_.at(static_cast<std::size_t>(b));
  }

  /// Scalars actually held in memory: m*n/beta.
  std::int64_t stored_scalars() const {
    std::int64_t s = 0;
    for (const auto& a : blocks_) s += static_cast<std::int64_t>(a.size());
    return s;
  }

  Vector<T> apply_block(int b, const Vector<T>& x) const {
    return block(b) * x;
  }
  Vector<T> adjoint_block(int b, const Vector<T>& y) const {
    return block(b).adjoint() * y;
  }

 private:
  int m_;
  std::int64_t n_;
  std::vector<Matrix<T>> blocks_;
  std::string ensemble_;
  std::uint64_t seed_;
};

/// Draws one sensing block: iid standard Gaussian entries (circularly
/// symmetric for complex T), then every column rescaled to unit l2 norm.
template <Scalar T>
Matrix<T> draw_gaussian_block(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Matrix<T> a(rows, cols);
  // Row-major fill so the stream order is independent of Eigen's layout.
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      a(i, j) = rng.standard_gaussian<T>();
    }
  }
  for (Eigen::Index j = 0; j < cols; ++j) {
    const auto norm = a.col(j).norm();
    if (norm <= 0) throw std::runtime_error("draw_gaussian_block: zero column");
    a.col(j) /= norm;
  }
  return a;
}

/// Draws the full operator. Each block gets its own seed derived from `seed`
/// and the block id, so any block can be re-drawn in isolation.
template <Scalar T>
BlockSensor<T> draw_sensor(int m, std::int64_t n, int beta, std::uint64_t seed) {
  if (beta < 1 || m < 1 || n < 1) {
    throw std::invalid_argument("draw_sensor: bad dimensions");
  }
  if (m % beta != 0 || n % beta != 0) {
    throw std::invalid_argument("draw_sensor: beta must divide m and n");
  }
  const Eigen::Index mb = m / beta;
  const Eigen::Index nb = static_cast<Eigen::Index>(n / beta);
  std::vector<Matrix<T>> blocks;
  blocks.reserve(static_cast<std::size_t>(beta));
  for (int b = 0; b < beta; ++b) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(b)));
    blocks.push_back(draw_gaussian_block<T>(mb, nb, rng));
  }
  return BlockSensor<T>(m, n, std::move(blocks), "gaussian", seed);
}

/// Per-block measurements y_b = A_b z_b + v_b for one tensor, with the block
/// split defined by `map`. Noise is iid N(0, sigma^2) per measurement
/// (circularly symmetric for complex T).
template <Scalar T>
struct MeasurementSet {
  std::vector<Vector<T>> y;  // one vector of length m/beta per block

  int num_blocks() const { return static_cast<int>(y.size()); }
};

template <Scalar T>
Vector<T> to_vector(const std::vector<T>& v) {
  Vector<T> out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    out(static_cast<Eigen::Index>(i)) = v[i];
  }
  return out;
}

/// Noiseless measurement of every block; energy of the result defines the
/// signal-to-noise ratio.
template <Scalar T>
MeasurementSet<T> measure_clean(const BlockSensor<T>& sensor,
                                const PartitionMap& map, const Tensor<T>& x) {
  if (sensor.num_blocks() != map.num_blocks() ||
      sensor.block_cols() != map.block_size()) {
    throw std::invalid_argument("measure: sensor/partition mismatch");
  }
  MeasurementSet<T> ms;
  ms.y.reserve(static_cast<std::size_t>(map.num_blocks()));
  for (int b = 0; b < map.num_blocks(); ++b) {
    ms.y.push_back(sensor.apply_block(b, to_vector(map.gather_block(x, b).data())));
  }
  return ms;
}

template <Scalar T>
real_t<T> measurement_energy(const MeasurementSet<T>& ms) {
  real_t<T> e = 0;
  for (const auto& yb : ms.y) e += yb.squaredNorm();
  return e;
}

template <Scalar T>
void add_noise(MeasurementSet<T>& ms, real_t<T> sigma, Rng& rng) {
  if (sigma < 0) throw std::invalid_argument("add_noise: sigma < 0");
  if (sigma == 0) return;
  for (auto& yb : ms.y) {
    for (Eigen::Index i = 0; i < yb.size(); ++i) {
      yb(i) += sigma * rng.standard_gaussian<T>();
    }
  }
}

/// y_b = A_b z_b + v_b for every block, noise drawn from `noise_seed`.
template <Scalar T>
MeasurementSet<T> measure(const BlockSensor<T>& sensor, const PartitionMap& map,
                          const Tensor<T>& x, real_t<T> sigma,
                          std::uint64_t noise_seed) {
  MeasurementSet<T> ms = measure_clean(sensor, map, x);
  Rng rng(noise_seed);
  add_noise(ms, sigma, rng);
  return ms;
}

}  // namespace bcs
