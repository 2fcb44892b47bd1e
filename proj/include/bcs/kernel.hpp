#pragma once

#include <cmath>
#include <iostream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "bcs/scalar.hpp"
#include "bcs/shape.hpp"
#include "bcs/tensor.hpp"

namespace bcs {

inline Shape kernel_shape(int order) {
  return Shape(std::vector<int>(static_cast<std::size_t>(order), 3));
}

/// Learned support-correlation kernel: a 3^d tensor whose entry at offset
/// (o_1,...,o_d), o_i in {-1,0,1}, estimates how often the neighbor at that
/// offset is active given an active entry. The center is identically zero.
struct CorrelationKernel {
  Tensor<double> values;  // shape (3,...,3), order d

  CorrelationKernel() : values(kernel_shape(1)) {}

  explicit CorrelationKernel(Tensor<double> v) : values(std::move(v)) {
    const Shape& s = values.shape();
    for (int l = 0; l < s.order(); ++l) {
      if (s.dim(l) != 3) {
        throw std::invalid_argument("CorrelationKernel: extent must be 3");
      }
    }
    for (std::int64_t i = 0; i < values.size(); ++i) {
      if (values[i] < 0) {
        throw std::invalid_argument("CorrelationKernel: negative entry");
      }
    }
    if (values[center_flat(s.order())] != 0.0) {
      throw std::invalid_argument("CorrelationKernel: center must be 0");
    }
  }

  static CorrelationKernel zeros(int order) {
    return CorrelationKernel(Tensor<double>(kernel_shape(order)));
  }

  int order() const { return values.order(); }

  static std::int64_t center_flat(int order) {
    std::int64_t f = 0;
    for (int l = 0; l < order; ++l) f = f * 3 + 1;
    return f;
  }

  /// Entry at offset o, each component in {-1,0,1}.
  double at_offset(std::span<const int> o) const {
    MultiIndex idx(o.size());
    for (std::size_t l = 0; l < o.size(); ++l) {
      if (o[l] < -1 || o[l] > 1) {
        throw std::out_of_range("CorrelationKernel: offset out of range");
      }
      idx[l] = o[l] + 1;
    }
    return values.at(idx);
  }
};

struct DatasetStats {
  int num_signals = 0;   // signals that entered the average
  double avg_sparsity = 0.0;
  Shape shape;
};

/// Mean support cardinality over the whole dataset.
template <Scalar T>
double average_sparsity(const std::vector<Tensor<T>>& dataset,
                        real_t<T> threshold = 0) {
  if (dataset.empty()) {
    throw std::invalid_argument("average_sparsity: empty dataset");
  }
  double total = 0;
  for (const auto& x : dataset) {
    for (std::int64_t i = 0; i < x.size(); ++i) {
      if (std::abs(x[i]) > threshold) total += 1;
    }
  }
  return total / static_cast<double>(dataset.size());
}

/// Estimates the support-correlation kernel from a dataset of sparse tensors:
/// per signal, count active neighbors at each offset around every active
/// entry, zero the center, normalize by that signal's support size, then
/// average the per-signal kernels. All-zero signals cannot be normalized and
/// are dropped from the average with a warning.
template <Scalar T>
std::pair<CorrelationKernel, DatasetStats> learn_kernel(
    const std::vector<Tensor<T>>& dataset, real_t<T> threshold = 0) {
  if (dataset.empty()) {
    throw std::invalid_argument("learn_kernel: empty dataset");
  }
  const Shape& shape = dataset.front().shape();
  const int d = shape.order();
  for (const auto& x : dataset) {
    if (x.shape() != shape) {
      throw std::invalid_argument("learn_kernel: mixed shapes in dataset");
    }
  }

  const Shape kshape = kernel_shape(d);
  Tensor<double> theta(kshape);
  int used = 0;
  double sparsity_total = 0;

  std::vector<MultiIndex> support;
  for (std::size_t j = 0; j < dataset.size(); ++j) {
    const Tensor<T>& x = dataset[j];
    support.clear();
    for (std::int64_t flat = 0; flat < x.size(); ++flat) {
      if (std::abs(x[flat]) > threshold) {
        support.push_back(shape.multi_index(flat));
      }
    }
    if (support.empty()) {
      std::cerr << "learn_kernel: signal " << j
                << " has empty support, skipping\n";
      continue;
    }

    Tensor<double> kappa(kshape);
    MultiIndex neighbor(static_cast<std::size_t>(d));
    for (const MultiIndex& omega : support) {
      for_each_index(kshape, [&](const MultiIndex& off) {
        bool in_bounds = true;
        bool center = true;
        for (int l = 0; l < d; ++l) {
          const int o = off[static_cast<std::size_t>(l)] - 1;
          if (o != 0) center = false;
          const int z = omega[static_cast<std::size_t>(l)] + o;
          if (z < 0 || z >= shape.dim(l)) {
            in_bounds = false;
            break;
          }
          neighbor[static_cast<std::size_t>(l)] = z;
        }
        if (!in_bounds || center) return;
        if (std::abs(x.at(neighbor)) > threshold) kappa.at(off) += 1.0;
      });
    }

    const double card = static_cast<double>(support.size());
    for (std::int64_t i = 0; i < kappa.size(); ++i) {
      theta[i] += kappa[i] / card;
    }
    sparsity_total += card;
    ++used;
  }

  if (used == 0) {
    throw std::invalid_argument("learn_kernel: every signal had empty support");
  }
  for (std::int64_t i = 0; i < theta.size(); ++i) {
    theta[i] /= static_cast<double>(used);
  }

  DatasetStats stats;
  stats.num_signals = used;
  stats.avg_sparsity = sparsity_total / static_cast<double>(used);
  stats.shape = shape;
  return {CorrelationKernel(std::move(theta)), stats};
}

}  // namespace bcs
