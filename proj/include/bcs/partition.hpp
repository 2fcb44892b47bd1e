#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "bcs/shape.hpp"
#include "bcs/tensor.hpp"

namespace bcs {

enum class PartitionKind {
  kComb,        // block from per-mode residues, position from quotients
  kContiguous,  // block from per-mode quotients, position from residues
};

/// How to split a d-order tensor into beta = prod(factors) equal blocks.
/// factors[l] must divide dims[l].
struct PartitionSpec {
  Shape shape;
  std::vector<int> factors;
  PartitionKind kind = PartitionKind::kComb;

  PartitionSpec(Shape s, std::vector<int> f, PartitionKind k = PartitionKind::kComb)
      : shape(std::move(s)), factors(std::move(f)), kind(k) {
    if (static_cast<int>(factors.size()) != shape.order()) {
      throw std::invalid_argument("PartitionSpec: factors order mismatch");
    }
    for (int l = 0; l < shape.order(); ++l) {
      const int f_l = factors[static_cast<std::size_t>(l)];
      if (f_l < 1 || shape.dim(l) % f_l != 0) {
        throw std::invalid_argument(
            "PartitionSpec: factor " + std::to_string(f_l) +
            " does not divide dim " + std::to_string(shape.dim(l)));
      }
    }
  }

  int num_blocks() const {
    int b = 1;
    for (int f : factors) b *= f;
    return b;
  }

  /// Per-mode extents of one block: dims[l] / factors[l].
  Shape block_shape() const {
    std::vector<int> bd(factors.size());
    for (std::size_t l = 0; l < factors.size(); ++l) {
      bd[l] = shape.dim(static_cast<int>(l)) / factors[l];
    }
    return Shape(bd);
  }

  std::int64_t block_size() const { return block_shape().size(); }
};

/// Materialized permutation: for each flat tensor index, which block it lands
/// in and where inside that block. Held as index maps; the permutation matrix
/// itself is never formed.
class PartitionMap {
 public:
  explicit PartitionMap(PartitionSpec spec) : spec_(std::move(spec)) {
    const Shape& shape = spec_.shape;
    const int d = shape.order();
    const Shape block_shape = spec_.block_shape();
    const int num_blocks = spec_.num_blocks();
    const std::int64_t block_size = block_shape.size();

    // Row-major strides over the per-mode block-id grid (extent factors[l]).
    std::vector<std::int64_t> bstr(static_cast<std::size_t>(d), 1);
    for (int l = d - 2; l >= 0; --l) {
      bstr[static_cast<std::size_t>(l)] =
          bstr[static_cast<std::size_t>(l + 1)] * spec_.factors[static_cast<std::size_t>(l + 1)];
    }

    block_of_.resize(static_cast<std::size_t>(shape.size()));
    pos_of_.resize(static_cast<std::size_t>(shape.size()));
    source_.assign(static_cast<std::size_t>(num_blocks),
                   std::vector<std::int64_t>(static_cast<std::size_t>(block_size)));

    for_each_index(shape, [&](const MultiIndex& idx) {
      std::int64_t block = 0;
      MultiIndex intra(static_cast<std::size_t>(d));
      for (int l = 0; l < d; ++l) {
        const int i_l = idx[static_cast<std::size_t>(l)];
        const int f_l = spec_.factors[static_cast<std::size_t>(l)];
        const int extent = block_shape.dim(l);
        int b_l, r_l;
        if (spec_.kind == PartitionKind::kComb) {
          b_l = i_l % f_l;   // interleaved: residue picks the block
          r_l = i_l / f_l;
        } else {
          b_l = i_l / extent;  // contiguous: quotient picks the block
          r_l = i_l % extent;
        }
        block += b_l * bstr[static_cast<std::size_t>(l)];
        intra[static_cast<std::size_t>(l)] = r_l;
      }
      const std::int64_t flat = shape.flat_index(idx);
      const std::int64_t pos = block_shape.flat_index(intra);
      block_of_[static_cast<std::size_t>(flat)] = static_cast<int>(block);
      pos_of_[static_cast<std::size_t>(flat)] = pos;
      source_[static_cast<std::size_t>(block)][static_cast<std::size_t>(pos)] = flat;
    });
  }

  const PartitionSpec& spec() const { return spec_; }
  int num_blocks() const { return spec_.num_blocks(); }
  std::int64_t block_size() const { return spec_.block_size(); }
  Shape block_shape() const { return spec_.block_shape(); }

  int block_of(std::int64_t flat) const {
    return block_of_[static_cast<std::size_t>(flat)];
  }
  std::int64_t position_of(std::int64_t flat) const {
    return pos_of_[static_cast<std::size_t>(flat)];
  }
  /// Flat tensor index feeding entry `pos` of block `block`.
  std::int64_t source_index(int block, std::int64_t pos) const {
    return source_[static_cast<std::size_t>(block)][static_cast<std::size_t>(pos)];
  }

  /// The entries of x living in `block`, as a tensor of the block shape.
  /// Intra-block coordinates are row-major, so the result's flat data is
  /// exactly the vectorization vec(X_b) the sensing operator consumes.
  template <Scalar T>
  Tensor<T> gather_block(const Tensor<T>& x, int block) const {
    check(x.shape(), block);
    const auto& src = source_[static_cast<std::size_t>(block)];
    std::vector<T> out(src.size());
    for (std::size_t p = 0; p < src.size(); ++p) {
      out[p] = x[src[p]];
    }
    return Tensor<T>(spec_.block_shape(), std::move(out));
  }

  /// Extends a block tensor to the full shape with zeros elsewhere.
  template <Scalar T>
  Tensor<T> scatter_block(const Tensor<T>& xb, int block) const {
    Tensor<T> out{spec_.shape};
    scatter_into(xb, block, out);
    return out;
  }

  /// Writes a block tensor's entries into x at their source positions,
  /// leaving every other entry of x untouched.
  template <Scalar T>
  void scatter_into(const Tensor<T>& xb, int block, Tensor<T>& x) const {
    check(x.shape(), block);
    if (xb.shape() != spec_.block_shape()) {
      throw std::invalid_argument("scatter_block: block shape mismatch");
    }
    const auto& src = source_[static_cast<std::size_t>(block)];
    for (std::size_t p = 0; p < src.size(); ++p) {
      x[src[p]] = xb[static_cast<std::int64_t>(p)];
    }
  }

 private:
  void check(const Shape& shape, int block) const {
    if (shape != spec_.shape) {
      throw std::invalid_argument("PartitionMap: tensor shape mismatch");
    }
    if (block < 0 || block >= num_blocks()) {
      throw std::invalid_argument("PartitionMap: block id out of range");
    }
  }

  PartitionSpec spec_;
  std::vector<int> block_of_;
  std::vector<std::int64_t> pos_of_;
  std::vector<std::vector<std::int64_t>> source_;
};

}  // namespace bcs
