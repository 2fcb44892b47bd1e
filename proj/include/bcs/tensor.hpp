#pragma once

#include <cmath>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

#include "bcs/scalar.hpp"
#include "bcs/shape.hpp"

namespace bcs {

/// Dense d-order tensor over a real or complex scalar field. Data is stored
/// flat in row-major order (last index fastest). Entries are validated finite
/// on construction; operations that build tensors go through the constructor,
/// so public results never carry NaN/Inf.
template <Scalar T>
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(Shape shape)
      : shape_(std::move(shape)),
        data_(static_cast<std::size_t>(shape_.size()), T(0)) {}

  Tensor(Shape shape, std::vector<T> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    if (static_cast<std::int64_t>(data_.size()) != shape_.size()) {
      throw std::invalid_argument("Tensor: data length != shape size");
    }
    for (const T& v : data_) {
      if (!is_finite(v)) throw std::invalid_argument("Tensor: non-finite entry");
    }
  }

  static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }

  const Shape& shape() const { return shape_; }
  std::int64_t size() const { return shape_.size(); }
  int order() const { return shape_.order(); }

  const std::vector<T>& data() const { return data_; }
  std::vector<T>& data() { return data_; }

  T operator[](std::int64_t flat) const {
    return data_[static_cast<std::size_t>(flat)];
  }
  T& operator[](std::int64_t flat) {
    return data_[static_cast<std::size_t>(flat)];
  }

  T at(std::span<const int> multi) const {
    return data_[static_cast<std::size_t>(shape_.flat_index(multi))];
  }
  T& at(std::span<const int> multi) {
    return data_[static_cast<std::size_t>(shape_.flat_index(multi))];
  }

  real_t<T> max_abs() const {
    real_t<T> m = 0;
    for (const T& v : data_) m = std::max(m, std::abs(v));
    return m;
  }

  /// Squared Frobenius norm.
  real_t<T> frobenius_sq() const {
    real_t<T> s = 0;
    for (const T& v : data_) s += abs_sq(v);
    return s;
  }

  void scale(T c) {
    for (T& v : data_) v *= c;
  }

  Tensor& operator+=(const Tensor& other) {
    require_same_shape(other);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
  }

  Tensor& operator-=(const Tensor& other) {
    require_same_shape(other);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
    return *this;
  }

 private:
  void require_same_shape(const Tensor& other) const {
    if (shape_ != other.shape_) {
      throw std::invalid_argument("Tensor: shape mismatch");
    }
  }

  Shape shape_;
  std::vector<T> data_;
};

/// Entrywise magnitudes as a real tensor.
template <Scalar T>
Tensor<real_t<T>> magnitudes(const Tensor<T>& x) {
  std::vector<real_t<T>> out(x.data().size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::abs(x.data()[i]);
  return Tensor<real_t<T>>(x.shape(), std::move(out));
}

template <Scalar T>
real_t<T> distance_sq(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.shape() != b.shape()) {
    throw std::invalid_argument("distance_sq: shape mismatch");
  }
  real_t<T> s = 0;
  for (std::size_t i = 0; i < a.data().size(); ++i) {
    s += abs_sq(a.data()[i] - b.data()[i]);
  }
  return s;
}

/// Set of multi-indices of the above-threshold entries of a tensor.
struct SupportSet {
  std::set<MultiIndex> indices;

  std::size_t size() const { return indices.size(); }
  bool contains(const MultiIndex& idx) const { return indices.count(idx) > 0; }
  bool operator==(const SupportSet& other) const {
    return indices == other.indices;
  }
};

/// Multi-indices with |entry| strictly above `threshold`.
template <Scalar T>
SupportSet extract_support(const Tensor<T>& x, real_t<T> threshold) {
  if (threshold < 0) {
    throw std::invalid_argument("extract_support: threshold must be >= 0");
  }
  SupportSet s;
  for (std::int64_t flat = 0; flat < x.size(); ++flat) {
    if (std::abs(x[flat]) > threshold) {
      s.indices.insert(x.shape().multi_index(flat));
    }
  }
  return s;
}

/// Threshold for supports of floating-point reconstructions, which never
/// carry exact zeros.
template <Scalar T>
real_t<T> reconstruction_support_threshold(const Tensor<T>& x) {
  return static_cast<real_t<T>>(1e-9) * x.max_abs();
}

enum class ConvMode {
  kFull,          // output extent n_i + m_i - 1 per mode
  kSameCentered,  // output matches A; odd kernel, center aligned, zero padding
};

/// d-dimensional direct convolution C(i) = sum_j A(j) B(i - j).
/// Kernels here are 3^d, so the direct sum is O(3^d n); no FFT path.
template <Scalar T>
Tensor<T> convolve(const Tensor<T>& a, const Tensor<T>& b, ConvMode mode) {
  const int d = a.order();
  if (b.order() != d) {
    throw std::invalid_argument("convolve: tensor order mismatch");
  }

  if (mode == ConvMode::kFull) {
    std::vector<int> out_dims(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) {
      out_dims[static_cast<std::size_t>(i)] = a.shape().dim(i) + b.shape().dim(i) - 1;
    }
    Tensor<T> out{Shape(out_dims)};
    // Accumulate each product A(j)B(k) at output j + k.
    for_each_index(a.shape(), [&](const MultiIndex& j) {
      const T aj = a.at(j);
      if (aj == T(0)) return;
      MultiIndex o(static_cast<std::size_t>(d));
      for_each_index(b.shape(), [&](const MultiIndex& k) {
        for (int i = 0; i < d; ++i) o[static_cast<std::size_t>(i)] = j[static_cast<std::size_t>(i)] + k[static_cast<std::size_t>(i)];
        out.at(o) += aj * b.at(k);
      });
    });
    return out;
  }

  // Same-centered: kernel must have odd extent per mode; out(i) =
  // sum over offsets o in [-h, h]^d of A(i - o) * B(o + h), zero outside A.
  std::vector<int> half(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    const int ext = b.shape().dim(i);
    if (ext % 2 == 0) {
      throw std::invalid_argument(
          "convolve: same-centered mode requires odd kernel extents");
    }
    half[static_cast<std::size_t>(i)] = ext / 2;
  }
  Tensor<T> out{a.shape()};
  for_each_index(a.shape(), [&](const MultiIndex& i) {
    T acc(0);
    MultiIndex src(static_cast<std::size_t>(d));
    for_each_index(b.shape(), [&](const MultiIndex& k) {
      bool inside = true;
      for (int ax = 0; ax < d; ++ax) {
        const int off = k[static_cast<std::size_t>(ax)] - half[static_cast<std::size_t>(ax)];
        const int s = i[static_cast<std::size_t>(ax)] - off;
        if (s < 0 || s >= a.shape().dim(ax)) {
          inside = false;
          break;
        }
        src[static_cast<std::size_t>(ax)] = s;
      }
      if (inside) acc += a.at(src) * b.at(k);
    });
    out.at(i) = acc;
  });
  return out;
}

}  // namespace bcs
