#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "dot/error.hpp"
#include "dot/numerics.hpp"
#include "dot/rng.hpp"
#include "dot/tensor.hpp"

namespace dot {

// Weighted point cloud in R^d.  Invariants: weights positive and summing to
// one (within 1e-12), support atoms pairwise distinct.
class DiscreteMeasure {
public:
  DiscreteMeasure() = default;

  DiscreteMeasure(std::vector<std::vector<double>> points, std::vector<double> weights) {
    if (points.empty() || points.size() != weights.size())
      throw config_error("measure: points/weights size mismatch or empty");
    dim_ = points.front().size();
    if (dim_ == 0) throw config_error("measure: zero-dimensional atoms");
    coords_.reserve(points.size() * dim_);
    for (const auto& p : points) {
      if (p.size() != dim_) throw config_error("measure: inconsistent atom dimensions");
      coords_.insert(coords_.end(), p.begin(), p.end());
    }
    weights_ = std::move(weights);
    validate();
  }

  static DiscreteMeasure from_flat(std::vector<double> coords, std::size_t dim,
                                   std::vector<double> weights) {
    DiscreteMeasure m;
    if (dim == 0 || coords.size() != dim * weights.size() || weights.empty())
      throw config_error("measure: bad flat construction");
    m.dim_ = dim;
    m.coords_ = std::move(coords);
    m.weights_ = std::move(weights);
    m.validate();
    return m;
  }

  static DiscreteMeasure dirac(std::vector<double> point) {
    return DiscreteMeasure({std::move(point)}, {1.0});
  }

  // Uniform weights on a regular midpoint grid of m^d points in [0,1]^d.
  static DiscreteMeasure uniform_grid(std::size_t d, std::size_t per_axis) {
    if (d == 0 || per_axis == 0) throw config_error("uniform_grid: empty");
    std::vector<std::size_t> dims(d, per_axis);
    TensorShape shape(dims);
    std::vector<double> coords;
    coords.reserve(shape.total() * d);
    std::vector<std::size_t> idx;
    for (std::size_t f = 0; f < shape.total(); ++f) {
      shape.unflatten(f, idx);
      for (std::size_t k = 0; k < d; ++k)
        coords.push_back((static_cast<double>(idx[k]) + 0.5) / static_cast<double>(per_axis));
    }
    std::vector<double> w(shape.total(), 1.0 / static_cast<double>(shape.total()));
    return from_flat(std::move(coords), d, std::move(w));
  }

  // n equally spaced points {i/(n-1)} on [0,1], uniform weights (d = 1).
  static DiscreteMeasure uniform_line(std::size_t n) {
    if (n == 0) throw config_error("uniform_line: empty");
    std::vector<double> coords(n), w(n, 1.0 / static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i)
      coords[i] = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
    return from_flat(std::move(coords), 1, std::move(w));
  }

  std::size_t size() const { return weights_.size(); }
  std::size_t dim() const { return dim_; }
  std::span<const double> point(std::size_t i) const {
    return {coords_.data() + i * dim_, dim_};
  }
  double weight(std::size_t i) const { return weights_[i]; }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<double>& coords() const { return coords_; }

  std::vector<std::vector<double>> points_list() const {
    std::vector<std::vector<double>> out(size());
    for (std::size_t i = 0; i < size(); ++i)
      out[i].assign(point(i).begin(), point(i).end());
    return out;
  }

private:
  void validate() const {
    KahanSum s;
    for (double w : weights_) {
      if (!(w > 0.0)) throw config_error("measure: weights must be strictly positive");
      s.add(w);
    }
    if (std::abs(s.value() - 1.0) > 1e-12)
      throw config_error("measure: weights must sum to 1 (got " + std::to_string(s.value()) + ")");
    // pairwise-distinct atoms, checked via lexicographic sort
    std::vector<std::size_t> order(size());
    std::iota(order.begin(), order.end(), 0);
    auto less = [&](std::size_t a, std::size_t b) {
      return std::lexicographical_compare(point(a).begin(), point(a).end(),
                                          point(b).begin(), point(b).end());
    };
    std::sort(order.begin(), order.end(), less);
    for (std::size_t i = 1; i < order.size(); ++i) {
      if (std::equal(point(order[i - 1]).begin(), point(order[i - 1]).end(),
                     point(order[i]).begin()))
        throw config_error("measure: support atoms must be pairwise distinct");
    }
  }

  std::size_t dim_ = 0;
  std::vector<double> coords_;  // size() * dim_, row-major
  std::vector<double> weights_;
};

inline double euclidean_dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += sqr(a[k] - b[k]);
  return std::sqrt(s);
}

// Ordered marginals (mu_1, ..., mu_N) plus the exponent p of the product
// metric d_{X,p}(x,y) = (sum_i d(x_i,y_i)^p)^(1/p).
class MarginalTuple {
public:
  MarginalTuple() = default;
  MarginalTuple(std::vector<DiscreteMeasure> marginals, double p = 2.0)
      : marginals_(std::move(marginals)), p_(p) {
    if (marginals_.size() < 2) throw config_error("marginal tuple requires N >= 2");
    if (!(p_ >= 1.0) || !std::isfinite(p_))
      throw config_error("product metric exponent must satisfy 1 <= p < inf");
  }

  std::size_t count() const { return marginals_.size(); }
  const DiscreteMeasure& marginal(std::size_t i) const { return marginals_[i]; }
  const std::vector<DiscreteMeasure>& marginals() const { return marginals_; }
  double metric_p() const { return p_; }

  TensorShape shape() const {
    std::vector<std::size_t> dims(count());
    for (std::size_t i = 0; i < count(); ++i) dims[i] = marginals_[i].size();
    return TensorShape(dims);
  }

  std::size_t product_size() const { return shape().total(); }

  // Product weights P(x) = prod_i mu_i(x_i), flat in tensor layout.
  std::vector<double> product_weights() const {
    TensorShape s = shape();
    std::vector<double> w(s.total(), 1.0);
    for (std::size_t i = 0; i < count(); ++i) {
      for (std::size_t a = 0; a < marginals_[i].size(); ++a) {
        const double wa = marginals_[i].weight(a);
        s.for_each_in_slice(i, a, [&](std::size_t f) { w[f] *= wa; });
      }
    }
    return w;
  }

  // d_{X,p} between two product atoms addressed by flat indices over
  // (possibly different) supports of the same slot dimensions.
  double product_metric(const MarginalTuple& other, std::size_t flat_a, std::size_t flat_b,
                        double q) const {
    TensorShape sa = shape();
    TensorShape sb = other.shape();
    double acc = 0.0;
    for (std::size_t i = 0; i < count(); ++i) {
      const std::size_t ia = sa.axis_index(flat_a, i);
      const std::size_t ib = sb.axis_index(flat_b, i);
      acc += std::pow(euclidean_dist(marginals_[i].point(ia), other.marginal(i).point(ib)), q);
    }
    return std::pow(acc, 1.0 / q);
  }

private:
  std::vector<DiscreteMeasure> marginals_;
  double p_ = 2.0;
};

// Explicit product measure on the flattened product space (ambient dimension
// sum_i d_i).  Guarded by a capacity limit; everything downstream is dense.
inline DiscreteMeasure product(const MarginalTuple& t, std::size_t capacity = 1000000) {
  TensorShape s = t.shape();
  if (s.total() > capacity)
    throw capacity_error("product support " + std::to_string(s.total()) +
                         " exceeds capacity " + std::to_string(capacity));
  std::size_t d = 0;
  for (std::size_t i = 0; i < t.count(); ++i) d += t.marginal(i).dim();
  std::vector<double> coords;
  coords.reserve(s.total() * d);
  std::vector<std::size_t> idx;
  for (std::size_t f = 0; f < s.total(); ++f) {
    s.unflatten(f, idx);
    for (std::size_t i = 0; i < t.count(); ++i) {
      auto pt = t.marginal(i).point(idx[i]);
      coords.insert(coords.end(), pt.begin(), pt.end());
    }
  }
  return DiscreteMeasure::from_flat(std::move(coords), d, t.product_weights());
}

// ---------------------------------------------------------------------------
// Sampling

enum class SamplerKind { UniformCube, Resample, Curve };
enum class CurveKind { Line, Helix };

struct SamplerSpec {
  SamplerKind kind = SamplerKind::UniformCube;
  std::size_t dim = 1;            // UniformCube
  DiscreteMeasure base;           // Resample
  CurveKind curve_kind = CurveKind::Helix;

  static SamplerSpec uniform_cube(std::size_t d) {
    SamplerSpec s;
    s.kind = SamplerKind::UniformCube;
    s.dim = d;
    return s;
  }
  static SamplerSpec resample(DiscreteMeasure m) {
    SamplerSpec s;
    s.kind = SamplerKind::Resample;
    s.base = std::move(m);
    return s;
  }
  static SamplerSpec curve(CurveKind c) {
    SamplerSpec s;
    s.kind = SamplerKind::Curve;
    s.curve_kind = c;
    return s;
  }
};

// Built-in parametric curves on [0,1], mapped into [0,1]^3.
inline std::vector<double> curve_point(CurveKind kind, double t) {
  switch (kind) {
    case CurveKind::Line: {
      // diagonal scaled so the parameter is the arclength (isometric to [0,1])
      const double inv_sqrt3 = 0.57735026918962576451;
      return {t * inv_sqrt3, t * inv_sqrt3, t * inv_sqrt3};
    }
    case CurveKind::Helix:
      return {0.5 + 0.4 * std::cos(4.0 * 3.14159265358979323846 * t),
              0.5 + 0.4 * std::sin(4.0 * 3.14159265358979323846 * t), t};
  }
  return {};
}

// Empirical measure: n i.i.d. draws, duplicate atoms merged with summed
// weights (first-seen order preserved).  Bit-reproducible per seed.
inline DiscreteMeasure empirical(const SamplerSpec& source, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw config_error("empirical: n must be >= 1");
  Rng rng(seed);

  std::vector<std::vector<double>> raw;
  raw.reserve(n);
  switch (source.kind) {
    case SamplerKind::UniformCube: {
      if (source.dim == 0) throw config_error("empirical: sampler dimension 0");
      for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> p(source.dim);
        for (auto& c : p) c = rng.uniform01();
        raw.push_back(std::move(p));
      }
      break;
    }
    case SamplerKind::Resample: {
      const auto& base = source.base;
      if (base.size() == 0) throw config_error("empirical: resample base is empty");
      std::vector<double> cdf(base.size());
      double acc = 0.0;
      for (std::size_t i = 0; i < base.size(); ++i) {
        acc += base.weight(i);
        cdf[i] = acc;
      }
      for (std::size_t i = 0; i < n; ++i) {
        const double u = rng.uniform01();
        const std::size_t k = static_cast<std::size_t>(
            std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
        const auto pt = base.point(std::min(k, base.size() - 1));
        raw.emplace_back(pt.begin(), pt.end());
      }
      break;
    }
    case SamplerKind::Curve: {
      for (std::size_t i = 0; i < n; ++i) raw.push_back(curve_point(source.curve_kind, rng.uniform01()));
      break;
    }
  }

  // merge duplicates, preserving first-seen order
  std::map<std::vector<double>, std::size_t> seen;
  std::vector<std::vector<double>> pts;
  std::vector<double> counts;
  for (auto& p : raw) {
    auto it = seen.find(p);
    if (it == seen.end()) {
      seen.emplace(p, pts.size());
      pts.push_back(std::move(p));
      counts.push_back(1.0);
    } else {
      counts[it->second] += 1.0;
    }
  }
  for (auto& c : counts) c /= static_cast<double>(n);
  return DiscreteMeasure(std::move(pts), std::move(counts));
}

}  // namespace dot
