#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "dot/error.hpp"
#include "dot/measure.hpp"
#include "dot/tensor.hpp"

namespace dot {

enum class CostKind { SqEuclideanSum, PowerDistance, ExplicitTensor };

// Cost on the product support: evaluated tensor plus Lipschitz metadata.
//
//   SqEuclideanSum      c(x) = sum_{i<j} |x_i - x_j|^2
//   PowerDistance(r)    c(x) = sum_{i<j} |x_i - x_j|^r,  r >= 1
//   ExplicitTensor      user-provided entries and Lipschitz constant
//
// lipschitz() is a valid constant for c w.r.t. the product metric d_{X,p};
// coordinate_lipschitz(i) bounds |c(x_i,.) - c(x_i',.)| / d(x_i, x_i'), the
// constant that controls the dual potentials' difference quotients.
class CostSpec {
public:
  static CostSpec sq_euclidean_sum(const MarginalTuple& t) {
    CostSpec c;
    c.kind_ = CostKind::SqEuclideanSum;
    c.power_ = 2.0;
    c.build(t);
    return c;
  }

  static CostSpec power_distance(const MarginalTuple& t, double r) {
    if (!(r >= 1.0)) throw config_error("power distance cost requires exponent >= 1");
    CostSpec c;
    c.kind_ = CostKind::PowerDistance;
    c.power_ = r;
    c.build(t);
    return c;
  }

  static CostSpec explicit_tensor(const MarginalTuple& t, std::vector<double> entries,
                                  double lipschitz) {
    CostSpec c;
    c.kind_ = CostKind::ExplicitTensor;
    c.shape_ = t.shape();
    if (entries.size() != c.shape_.total())
      throw config_error("explicit cost tensor has wrong size");
    for (double v : entries)
      if (!std::isfinite(v)) throw config_error("cost tensor must be finite");
    c.tensor_ = std::move(entries);
    c.lipschitz_ = lipschitz;
    c.coord_lipschitz_.assign(t.count(), lipschitz);
    return c;
  }

  CostKind kind() const { return kind_; }
  double power() const { return power_; }
  const std::vector<double>& tensor() const { return tensor_; }
  const TensorShape& shape() const { return shape_; }
  double lipschitz() const { return lipschitz_; }
  double coordinate_lipschitz(std::size_t i) const { return coord_lipschitz_[i]; }
  double max_coordinate_lipschitz() const {
    double m = 0.0;
    for (double v : coord_lipschitz_) m = std::max(m, v);
    return m;
  }

  std::string name() const {
    switch (kind_) {
      case CostKind::SqEuclideanSum: return "sq_euclidean_sum";
      case CostKind::PowerDistance: return "power_distance(" + std::to_string(power_) + ")";
      case CostKind::ExplicitTensor: return "explicit_tensor";
    }
    return "?";
  }

  // Re-evaluates a built-in kind on another tuple (used when perturbing
  // marginals); explicit tensors cannot be transplanted.
  CostSpec rebind(const MarginalTuple& t) const {
    switch (kind_) {
      case CostKind::SqEuclideanSum: return sq_euclidean_sum(t);
      case CostKind::PowerDistance: return power_distance(t, power_);
      case CostKind::ExplicitTensor:
        throw config_error("explicit cost tensor cannot be re-evaluated on new marginals");
    }
    return *this;
  }

  // Lipschitz constant of the built-in formulas w.r.t. d_{X,p}, computed on
  // the bounding boxes of the given supports (conservative, never invalid).
  // A second tuple widens the boxes to the joint hull.
  static double formula_lipschitz(CostKind kind, double r, const MarginalTuple& t, double p,
                                  std::vector<double>* per_coordinate = nullptr,
                                  const MarginalTuple* also = nullptr) {
    const std::size_t n = t.count();
    std::vector<std::vector<double>> lo(n), hi(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& m = t.marginal(i);
      lo[i].assign(m.dim(), std::numeric_limits<double>::infinity());
      hi[i].assign(m.dim(), -std::numeric_limits<double>::infinity());
      auto widen = [&](const DiscreteMeasure& mm) {
        for (std::size_t a = 0; a < mm.size(); ++a) {
          auto pt = mm.point(a);
          for (std::size_t k = 0; k < mm.dim(); ++k) {
            lo[i][k] = std::min(lo[i][k], pt[k]);
            hi[i][k] = std::max(hi[i][k], pt[k]);
          }
        }
      };
      widen(m);
      if (also) widen(also->marginal(i));
    }
    // max distance between the boxes of slots i and j
    auto box_dist_max = [&](std::size_t i, std::size_t j) {
      double s = 0.0;
      for (std::size_t k = 0; k < lo[i].size(); ++k) {
        const double d = std::max(std::abs(hi[i][k] - lo[j][k]), std::abs(hi[j][k] - lo[i][k]));
        s += d * d;
      }
      return std::sqrt(s);
    };
    const double rr = (kind == CostKind::SqEuclideanSum) ? 2.0 : r;
    std::vector<double> per(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double li = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const double dmax = box_dist_max(i, j);
        li += rr * (rr == 1.0 ? 1.0 : std::pow(std::max(dmax, 0.0), rr - 1.0));
      }
      per[i] = li;
    }
    if (per_coordinate) *per_coordinate = per;
    // aggregate via the dual exponent of p: |c(x)-c(y)| <= sum_i L_i d_i <= |L|_p' |d|_p
    const double pdual = p <= 1.0 ? std::numeric_limits<double>::infinity() : p / (p - 1.0);
    double agg = 0.0;
    if (!std::isfinite(pdual)) {
      for (double v : per) agg = std::max(agg, v);
    } else {
      for (double v : per) agg += std::pow(v, pdual);
      agg = std::pow(agg, 1.0 / pdual);
    }
    return agg;
  }

  static double formula_lipschitz_joint(CostKind kind, double r, const MarginalTuple& a,
                                        const MarginalTuple& b, double p) {
    if (kind == CostKind::ExplicitTensor)
      throw config_error("explicit cost tensors carry a user-provided Lipschitz constant");
    return formula_lipschitz(kind, r, a, p, nullptr, &b);
  }

private:
  void build(const MarginalTuple& t) {
    shape_ = t.shape();
    const std::size_t n = t.count();
    const std::size_t d0 = t.marginal(0).dim();
    for (std::size_t i = 1; i < n; ++i)
      if (t.marginal(i).dim() != d0)
        throw config_error("built-in costs require equal slot dimensions");
    tensor_.resize(shape_.total());
    std::vector<std::size_t> idx;
    for (std::size_t f = 0; f < shape_.total(); ++f) {
      shape_.unflatten(f, idx);
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
          const double d = euclidean_dist(t.marginal(i).point(idx[i]), t.marginal(j).point(idx[j]));
          acc += (kind_ == CostKind::SqEuclideanSum) ? d * d : std::pow(d, power_);
        }
      }
      tensor_[f] = acc;
    }
    lipschitz_ = formula_lipschitz(kind_, power_, t, t.metric_p(), &coord_lipschitz_);
  }

  CostKind kind_ = CostKind::SqEuclideanSum;
  double power_ = 2.0;
  TensorShape shape_;
  std::vector<double> tensor_;
  double lipschitz_ = 0.0;
  std::vector<double> coord_lipschitz_;
};

}  // namespace dot
