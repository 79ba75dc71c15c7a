#pragma once

#include <cstddef>
#include <numeric>
#include <vector>

#include "dot/error.hpp"

namespace dot {

// Shape of an N-way tensor over a product support, stored flat in row-major
// order with marginal 1 as the most significant axis. The same layout is
// used for cost tensors, couplings and the product measure, so flat indices
// are interchangeable between them.
class TensorShape {
public:
  TensorShape() = default;

  explicit TensorShape(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
    strides_.assign(dims_.size(), 1);
    total_ = 1;
    for (std::size_t i = dims_.size(); i-- > 0;) {
      strides_[i] = total_;
      total_ *= dims_[i];
    }
  }

  std::size_t order() const { return dims_.size(); }
  std::size_t total() const { return total_; }
  std::size_t dim(std::size_t axis) const { return dims_[axis]; }
  std::size_t stride(std::size_t axis) const { return strides_[axis]; }
  const std::vector<std::size_t>& dims() const { return dims_; }

  std::size_t flat(const std::vector<std::size_t>& idx) const {
    std::size_t f = 0;
    for (std::size_t i = 0; i < dims_.size(); ++i) f += idx[i] * strides_[i];
    return f;
  }

  void unflatten(std::size_t flat, std::vector<std::size_t>& idx) const {
    idx.resize(dims_.size());
    for (std::size_t i = 0; i < dims_.size(); ++i) {
      idx[i] = flat / strides_[i];
      flat %= strides_[i];
    }
  }

  std::size_t axis_index(std::size_t flat, std::size_t axis) const {
    return (flat / strides_[axis]) % dims_[axis];
  }

  // Visits every flat index with axis fixed at the given value. The slice
  // decomposes as outer * (dim * stride) + value * stride + inner.
  template <typename F>
  void for_each_in_slice(std::size_t axis, std::size_t value, F&& fn) const {
    const std::size_t stride = strides_[axis];
    const std::size_t block = stride * dims_[axis];
    const std::size_t base = value * stride;
    for (std::size_t outer = 0; outer < total_ / block; ++outer) {
      const std::size_t start = outer * block + base;
      for (std::size_t inner = 0; inner < stride; ++inner) fn(start + inner);
    }
  }

  bool operator==(const TensorShape& other) const { return dims_ == other.dims_; }

private:
  std::vector<std::size_t> dims_;
  std::vector<std::size_t> strides_;
  std::size_t total_ = 1;
};

}  // namespace dot
