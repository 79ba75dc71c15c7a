#pragma once

#include <cmath>
#include <vector>

#include "dot/error.hpp"
#include "dot/exact_ot.hpp"
#include "dot/measure.hpp"
#include "dot/numerics.hpp"
#include "dot/tensor.hpp"

namespace dot {

// Dense N-way probability tensor over the product support of a marginal
// tuple, together with its density d(pi)/dP.
class Coupling {
public:
  Coupling() = default;
  Coupling(MarginalTuple marginals, std::vector<double> mass)
      : marginals_(std::move(marginals)), shape_(marginals_.shape()), mass_(std::move(mass)) {
    if (mass_.size() != shape_.total()) throw config_error("coupling: mass tensor size mismatch");
    const std::vector<double> pw = marginals_.product_weights();
    density_.resize(mass_.size());
    for (std::size_t f = 0; f < mass_.size(); ++f) density_[f] = mass_[f] / pw[f];
  }

  static Coupling from_density(MarginalTuple marginals, std::vector<double> density) {
    Coupling c;
    c.marginals_ = std::move(marginals);
    c.shape_ = c.marginals_.shape();
    if (density.size() != c.shape_.total())
      throw config_error("coupling: density tensor size mismatch");
    c.density_ = std::move(density);
    const std::vector<double> pw = c.marginals_.product_weights();
    c.mass_.resize(c.density_.size());
    for (std::size_t f = 0; f < c.density_.size(); ++f) c.mass_[f] = c.density_[f] * pw[f];
    return c;
  }

  static Coupling product_coupling(MarginalTuple marginals) {
    std::vector<double> ones(marginals.shape().total(), 1.0);
    return from_density(std::move(marginals), std::move(ones));
  }

  const MarginalTuple& marginals() const { return marginals_; }
  const TensorShape& shape() const { return shape_; }
  const std::vector<double>& mass() const { return mass_; }
  const std::vector<double>& density() const { return density_; }

  double total_mass() const { return kahan_total(mass_); }

  // i-th marginal of the tensor (vector over the atoms of mu_i).
  std::vector<double> tensor_marginal(std::size_t i) const {
    std::vector<double> out(shape_.dim(i), 0.0);
    for (std::size_t a = 0; a < out.size(); ++a) {
      KahanSum s;
      shape_.for_each_in_slice(i, a, [&](std::size_t f) { s.add(mass_[f]); });
      out[a] = s.value();
    }
    return out;
  }

  // max_i max_a |pi_i(a) - mu_i(a)|
  double feasibility_residual() const {
    double r = 0.0;
    for (std::size_t i = 0; i < marginals_.count(); ++i) {
      const auto got = tensor_marginal(i);
      for (std::size_t a = 0; a < got.size(); ++a)
        r = std::max(r, std::abs(got[a] - marginals_.marginal(i).weight(a)));
    }
    return r;
  }

private:
  MarginalTuple marginals_;
  TensorShape shape_;
  std::vector<double> mass_;
  std::vector<double> density_;
};

// Number of cells with density strictly above threshold * max density.
inline std::size_t support_count(const Coupling& pi, double threshold = 0.0) {
  if (threshold < 0.0) throw config_error("support_count: threshold must be >= 0");
  double dmax = 0.0;
  for (double d : pi.density()) dmax = std::max(dmax, d);
  std::size_t n = 0;
  for (double d : pi.density()) n += (d > threshold * dmax) ? 1 : 0;
  return n;
}

// Iterative proportional fitting: scales a positive tensor along each axis
// in round-robin until every marginal matches within tol.  The limit is the
// entropic projection of the seed tensor onto the coupling polytope.
inline Coupling ipf_project(std::vector<double> tensor, const MarginalTuple& marginals,
                            double tol = 1e-10, std::size_t max_iters = 20000) {
  const TensorShape shape = marginals.shape();
  if (tensor.size() != shape.total()) throw config_error("ipf_project: tensor size mismatch");
  for (double v : tensor)
    if (!(v > 0.0)) throw config_error("ipf_project: tensor entries must be positive");

  std::vector<double> marg;
  for (std::size_t it = 0; it < max_iters; ++it) {
    double residual = 0.0;
    for (std::size_t i = 0; i < marginals.count(); ++i) {
      marg.assign(shape.dim(i), 0.0);
      for (std::size_t a = 0; a < shape.dim(i); ++a) {
        KahanSum s;
        shape.for_each_in_slice(i, a, [&](std::size_t f) { s.add(tensor[f]); });
        marg[a] = s.value();
      }
      for (std::size_t a = 0; a < shape.dim(i); ++a) {
        const double target = marginals.marginal(i).weight(a);
        const double scale = target / marg[a];
        shape.for_each_in_slice(i, a, [&](std::size_t f) { tensor[f] *= scale; });
        residual = std::max(residual, std::abs(marg[a] - target));
      }
    }
    if (residual <= tol) return Coupling(marginals, std::move(tensor));
  }
  throw convergence_error("ipf_project: did not reach residual tolerance", tol);
}

// Rounds an almost-feasible nonnegative tensor onto the coupling polytope:
// cap each axis at its target marginal, then spread the remaining deficit
// as the product of the per-axis deficits.  Exact marginals by
// construction (used for weak-duality diagnostics; note the correction is
// dense, so sparsity of the input is not preserved).
inline Coupling round_to_feasible(const Coupling& pi) {
  const MarginalTuple& marginals = pi.marginals();
  const TensorShape shape = pi.shape();
  std::vector<double> mass = pi.mass();

  const std::size_t n = marginals.count();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < shape.dim(i); ++a) {
      KahanSum s;
      shape.for_each_in_slice(i, a, [&](std::size_t f) { s.add(mass[f]); });
      const double target = marginals.marginal(i).weight(a);
      if (s.value() > target && s.value() > 0.0) {
        const double scale = target / s.value();
        shape.for_each_in_slice(i, a, [&](std::size_t f) { mass[f] *= scale; });
      }
    }
  }
  std::vector<std::vector<double>> deficit(n);
  double total_deficit = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    deficit[i].assign(shape.dim(i), 0.0);
    KahanSum dsum;
    for (std::size_t a = 0; a < shape.dim(i); ++a) {
      KahanSum s;
      shape.for_each_in_slice(i, a, [&](std::size_t f) { s.add(mass[f]); });
      deficit[i][a] = std::max(0.0, marginals.marginal(i).weight(a) - s.value());
      dsum.add(deficit[i][a]);
    }
    total_deficit = dsum.value();
  }
  if (total_deficit > 0.0) {
    const double denom = std::pow(total_deficit, static_cast<double>(n - 1));
    std::vector<std::size_t> idx;
    for (std::size_t f = 0; f < mass.size(); ++f) {
      shape.unflatten(f, idx);
      double corr = 1.0;
      for (std::size_t i = 0; i < n; ++i) corr *= deficit[i][idx[i]];
      mass[f] += corr / denom;
    }
  }
  return Coupling(marginals, std::move(mass));
}

// Exact W_q between two couplings viewed as measures on their product
// spaces, using the product metric d_{X,q}.  Zero-mass cells are dropped.
inline double coupling_distance(const Coupling& a, const Coupling& b, double q,
                                std::size_t max_cost_cells = 4000000) {
  if (a.marginals().count() != b.marginals().count())
    throw config_error("coupling_distance: tuples differ in N");
  for (std::size_t i = 0; i < a.marginals().count(); ++i)
    if (a.marginals().marginal(i).dim() != b.marginals().marginal(i).dim())
      throw config_error("coupling_distance: slot dimension mismatch");
  if (!(q >= 1.0)) throw config_error("coupling_distance: q must be >= 1");

  std::vector<std::size_t> ia, ib;
  std::vector<double> wa, wb;
  for (std::size_t f = 0; f < a.mass().size(); ++f)
    if (a.mass()[f] > 0.0) {
      ia.push_back(f);
      wa.push_back(a.mass()[f]);
    }
  for (std::size_t f = 0; f < b.mass().size(); ++f)
    if (b.mass()[f] > 0.0) {
      ib.push_back(f);
      wb.push_back(b.mass()[f]);
    }
  if (ia.empty() || ib.empty()) throw config_error("coupling_distance: empty coupling");
  if (ia.size() * ib.size() > max_cost_cells)
    throw capacity_error("coupling_distance: combined support too large");

  // normalize away summation dust so supplies and demands balance exactly
  const double sa = kahan_total(wa), sb = kahan_total(wb);
  for (double& w : wa) w /= sa;
  for (double& w : wb) w /= sb;

  std::vector<double> cost(ia.size() * ib.size());
  for (std::size_t r = 0; r < ia.size(); ++r)
    for (std::size_t c = 0; c < ib.size(); ++c)
      cost[r * ib.size() + c] =
          std::pow(a.marginals().product_metric(b.marginals(), ia[r], ib[c], q), q);

  TransportPlan plan = detail::solve_transport(cost, ia.size(), ib.size(), wa, wb);
  KahanSum s;
  for (std::size_t k = 0; k < cost.size(); ++k) s.add(cost[k] * plan.mass[k]);
  return std::pow(std::max(0.0, s.value()), 1.0 / q);
}

}  // namespace dot
