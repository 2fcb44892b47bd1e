#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace bcs {

#ifndef BCS_MAX_ORDER
inline constexpr int kMaxOrder = 8;
#else
inline constexpr int kMaxOrder = BCS_MAX_ORDER;
#endif

using MultiIndex = std::vector<int>;

/// Extents (n_1, ..., n_d) of a d-order tensor, with row-major flat indexing
/// (last index fastest).
class Shape {
 public:
  Shape() = default;

  explicit Shape(std::vector<int> dims) : dims_(std::move(dims)) {
    if (dims_.empty() || static_cast<int>(dims_.size()) > kMaxOrder) {
      throw std::invalid_argument("Shape: order must be in [1, " +
                                  std::to_string(kMaxOrder) + "]");
    }
    size_ = 1;
    for (int d : dims_) {
      if (d <= 0) throw std::invalid_argument("Shape: dims must be positive");
      size_ *= d;
    }
    strides_.assign(dims_.size(), 1);
    for (int i = static_cast<int>(dims_.size()) - 2; i >= 0; --i) {
      strides_[i] = strides_[i + 1] * dims_[i + 1];
    }
  }

  int order() const { return static_cast<int>(dims_.size()); }
  std::int64_t size() const { return size_; }
  const std::vector<int>& dims() const { return dims_; }
  int dim(int i) const { return dims_[static_cast<std::size_t>(i)]; }

  bool contains(std::span<const int> multi) const {
    if (static_cast<int>(multi.size()) != order()) return false;
    for (int i = 0; i < order(); ++i) {
      if (multi[i] < 0 || multi[i] >= dims_[i]) return false;
    }
    return true;
  }

  std::int64_t flat_index(std::span<const int> multi) const {
    if (!contains(multi)) {
      throw std::out_of_range("Shape::flat_index: component out of bounds");
    }
    std::int64_t flat = 0;
    for (int i = 0; i < order(); ++i) flat += strides_[i] * multi[i];
    return flat;
  }

  MultiIndex multi_index(std::int64_t flat) const {
    if (flat < 0 || flat >= size_) {
      throw std::out_of_range("Shape::multi_index: flat index out of bounds");
    }
    MultiIndex multi(dims_.size());
    for (std::size_t i = 0; i < dims_.size(); ++i) {
      multi[i] = static_cast<int>(flat / strides_[i]);
      flat %= strides_[i];
    }
    return multi;
  }

  bool operator==(const Shape& other) const { return dims_ == other.dims_; }
  bool operator!=(const Shape& other) const { return !(*this == other); }

 private:
  std::vector<int> dims_;
  std::vector<std::int64_t> strides_;
  std::int64_t size_ = 0;
};

/// Visits every multi-index of `shape` in row-major order.
inline void for_each_index(const Shape& shape,
                           const std::function<void(const MultiIndex&)>& fn) {
  MultiIndex idx(static_cast<std::size_t>(shape.order()), 0);
  const int d = shape.order();
  while (true) {
    fn(idx);
    int axis = d - 1;
    while (axis >= 0) {
      if (++idx[axis] < shape.dim(axis)) break;
      idx[axis] = 0;
      --axis;
    }
    if (axis < 0) return;
  }
}

inline std::int64_t flat_index(const Shape& shape, std::span<const int> multi) {
  return shape.flat_index(multi);
}

inline MultiIndex multi_index(const Shape& shape, std::int64_t flat) {
  return shape.multi_index(flat);
}

}  // namespace bcs
