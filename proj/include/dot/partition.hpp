#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "dot/error.hpp"
#include "dot/tensor.hpp"

namespace dot {

// Axis-aligned cubical partition of [0,1]^d with per-axis side scale*unit.
// Cell bounds are always computed as (integer multiple) * unit, so cells of
// a refinement chain sharing a boundary produce bit-identical coordinates
// and nesting is exact.  Boundary points belong to the lexicographically
// smallest owning cell.
class PartitionScheme {
public:
  PartitionScheme() = default;

  // Cubes of side epsilon/sqrt(d): diameter <= epsilon, count = ceil(sqrt(d)/
  // epsilon)^d <= K eps^-d with K = (2 sqrt(d))^d, certifying I(d, s).
  static PartitionScheme dyadic(std::size_t d, double epsilon, std::size_t s = 1,
                                std::size_t cell_capacity = 4000000) {
    if (d == 0) throw config_error("dyadic_partition: dimension must be >= 1");
    if (!(epsilon > 0.0 && epsilon <= 1.0))
      throw config_error("dyadic_partition: requires 0 < epsilon <= 1");
    PartitionScheme p;
    p.dim_ = d;
    p.epsilon_ = epsilon;
    p.s_ = s;
    const double sqrt_d = std::sqrt(static_cast<double>(d));
    p.unit_ = epsilon / sqrt_d;
    p.scale_ = 1;
    p.per_axis_ = static_cast<std::size_t>(std::ceil(sqrt_d / epsilon - 1e-12));
    p.covering_constant_ = std::pow(2.0 * sqrt_d, static_cast<double>(d));
    p.check_capacity(cell_capacity);
    return p;
  }

  std::size_t dim() const { return dim_; }
  std::size_t per_axis() const { return per_axis_; }
  double epsilon() const { return epsilon_; }
  std::size_t smoothness() const { return s_; }
  double covering_constant() const { return covering_constant_; }

  std::size_t cell_count() const {
    std::size_t c = 1;
    for (std::size_t i = 0; i < dim_; ++i) c *= per_axis_;
    return c;
  }

  // lower/upper bounds of a cell given its flat index (row-major multi-index);
  // the top cell per axis always extends to exactly 1.0
  void cell_bounds(std::size_t flat, std::vector<double>& lo, std::vector<double>& hi) const {
    lo.resize(dim_);
    hi.resize(dim_);
    for (std::size_t axis = dim_; axis-- > 0;) {
      const std::size_t k = flat % per_axis_;
      flat /= per_axis_;
      lo[axis] = static_cast<double>(k * scale_) * unit_;
      hi[axis] = (k + 1 == per_axis_) ? 1.0 : static_cast<double>((k + 1) * scale_) * unit_;
    }
  }

  double cell_diameter(std::size_t flat) const {
    std::vector<double> lo, hi;
    cell_bounds(flat, lo, hi);
    double s = 0.0;
    for (std::size_t k = 0; k < dim_; ++k) s += sqr_(hi[k] - lo[k]);
    return std::sqrt(s);
  }

  // Owning cell of a point in [0,1]^d; exact boundary points go to the
  // lexicographically smaller cell.
  std::size_t locate(const std::vector<double>& x) const {
    if (x.size() != dim_) throw config_error("partition locate: dimension mismatch");
    std::size_t flat = 0;
    for (std::size_t axis = 0; axis < dim_; ++axis) {
      const double side = static_cast<double>(scale_) * unit_;
      auto lo_of = [&](std::size_t k) { return static_cast<double>(k * scale_) * unit_; };
      long k = static_cast<long>(std::floor(x[axis] / side));
      if (k < 0) k = 0;
      if (k >= static_cast<long>(per_axis_)) k = static_cast<long>(per_axis_) - 1;
      while (k > 0 && x[axis] <= lo_of(static_cast<std::size_t>(k)))
        --k;  // boundary (or rounding) -> smaller cell
      while (k + 1 < static_cast<long>(per_axis_) && x[axis] > lo_of(static_cast<std::size_t>(k + 1)))
        ++k;
      flat = flat * per_axis_ + static_cast<std::size_t>(k);
    }
    return flat;
  }

  // Index of the unique coarser-level cell containing this cell (requires
  // this level's per-axis count to be ceil(coarse.per_axis * 3) pattern).
  std::size_t parent_in(const PartitionScheme& coarse, std::size_t flat) const {
    std::size_t parent = 0;
    std::vector<std::size_t> idx(dim_);
    for (std::size_t axis = dim_; axis-- > 0;) {
      idx[axis] = flat % per_axis_;
      flat /= per_axis_;
    }
    for (std::size_t axis = 0; axis < dim_; ++axis) {
      const std::size_t ratio = coarse.scale_ / scale_;
      parent = parent * coarse.per_axis_ + idx[axis] / ratio;
    }
    return parent;
  }

private:
  static double sqr_(double v) { return v * v; }

  void check_capacity(std::size_t cap) const {
    double count = 1.0;
    for (std::size_t i = 0; i < dim_; ++i) count *= static_cast<double>(per_axis_);
    if (count > static_cast<double>(cap))
      throw capacity_error("partition cell count exceeds capacity");
  }

  friend std::vector<PartitionScheme> refinement_chain(std::size_t, double, std::size_t,
                                                       std::size_t);

  std::size_t dim_ = 0;
  std::size_t per_axis_ = 0;
  std::size_t scale_ = 1;  // finest units per cell side
  double unit_ = 0.0;      // finest-unit side length
  double epsilon_ = 0.0;   // certified resolution (max diameter)
  std::size_t s_ = 1;
  double covering_constant_ = 0.0;  // K with count <= K epsilon^-d
};

inline PartitionScheme dyadic_partition(std::size_t d, double epsilon, std::size_t s = 1,
                                        std::size_t cell_capacity = 4000000) {
  return PartitionScheme::dyadic(d, epsilon, s, cell_capacity);
}

// Chain A_1, ..., A_T (finest first) with level-t resolution 3^(t-1) eps:
// each A_t refines A_{t+1} cell-exactly (side ratio 3), diameters obey
// D_{A_t} <= 3^t eps and counts obey |A_t| <= (6 sqrt(d))^d (3^t eps)^-d.
inline std::vector<PartitionScheme> refinement_chain(std::size_t d, double epsilon, std::size_t T,
                                                     std::size_t cell_capacity = 4000000) {
  if (T == 0) throw config_error("refinement_chain: T must be >= 1");
  const double top = epsilon * std::pow(3.0, static_cast<double>(T));
  if (top > 1.0 + 1e-12) throw config_error("refinement_chain: requires epsilon * 3^T <= 1");

  std::vector<PartitionScheme> chain;
  PartitionScheme finest = PartitionScheme::dyadic(d, epsilon, 1, cell_capacity);
  chain.push_back(finest);
  for (std::size_t t = 2; t <= T; ++t) {
    PartitionScheme level = chain.back();
    level.scale_ *= 3;
    level.per_axis_ = (level.per_axis_ + 2) / 3;  // ceil(m/3) keeps nesting exact
    level.epsilon_ = level.epsilon_ * 3.0;
    chain.push_back(level);
  }
  return chain;
}

}  // namespace dot
