#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "dot/cost.hpp"
#include "dot/coupling.hpp"
#include "dot/divergence.hpp"
#include "dot/error.hpp"
#include "dot/measure.hpp"
#include "dot/numerics.hpp"
#include "dot/parallel.hpp"
#include "dot/root.hpp"
#include "dot/tensor.hpp"

namespace dot {

// min over couplings of  integral(c dpi) + eps * D_phi(pi, P).
struct ProblemSpec {
  MarginalTuple marginals;
  CostSpec cost;
  DivergenceSpec divergence;
  double epsilon = 1.0;
  std::size_t capacity = 1000000;

  void validate() const {
    if (!(epsilon > 0.0)) throw config_error("epsilon must be positive");
    if (!(cost.shape() == marginals.shape()))
      throw config_error("cost tensor shape does not match marginals");
    if (marginals.product_size() > capacity)
      throw capacity_error("product support exceeds capacity");
  }
};

enum class SweepMode { GaussSeidel, Jacobi };

struct SolverOptions {
  double tol = 1e-9;        // outer tolerance on max |F_i - 1|
  double root_tol = 1e-12;  // scalar-root tolerance on |F - 1|
  std::size_t max_iters = 10000;
  SweepMode sweep = SweepMode::GaussSeidel;
  std::size_t jobs = 1;
  // cross-checks the entropic closed-form update against the generic
  // root-finder at every atom (slow; used by tests)
  bool debug_check_closed_form = false;
  // records per-iteration residual, dual value, and the primal value of the
  // feasibility-rounded iterate (slow; used by tests)
  bool record_trace = false;
};

struct IterationTrace {
  double residual = 0.0;
  double dual_value = 0.0;          // original units
  double rounded_primal_value = 0.0;  // objective of the rounded feasible coupling
};

// Per-marginal dual vectors, reported in original units (h = eps * h~ where
// h~ solves the rescaled problem with eps = 1).
struct DualPotentials {
  std::vector<std::vector<double>> h;
  std::vector<double> normalization_offsets;
};

struct Solution {
  DualPotentials potentials;
  Coupling coupling;
  double primal_value = 0.0;
  double dual_value = 0.0;
  double gap = 0.0;
  std::size_t iterations = 0;
  double max_residual = 0.0;
  std::vector<IterationTrace> trace;  // only with record_trace
};

namespace detail {

// Shared state of the block dual ascent on the rescaled problem (eps = 1,
// cost c/eps).  The fixed point is  F_i(a) := sum_{x^-i} psi'(h(+)(x) -
// c~(x)) P^-i(x^-i) = 1  at every atom a of every marginal.
class DotSolverState {
public:
  DotSolverState(const ProblemSpec& prob, const SolverOptions& opts)
      : prob_(prob), opts_(opts), shape_(prob.marginals.shape()) {
    prob_.validate();
    const std::size_t total = shape_.total();
    pw_ = prob_.marginals.product_weights();
    log_pw_.resize(total);
    for (std::size_t f = 0; f < total; ++f) log_pw_[f] = std::log(pw_[f]);
    ct_.resize(total);
    const auto& c = prob_.cost.tensor();
    for (std::size_t f = 0; f < total; ++f) ct_[f] = c[f] / prob_.epsilon;

    const std::size_t n = prob_.marginals.count();
    const double level = prob_.divergence.psi_prime_inverse_of_one() / static_cast<double>(n);
    ht_.resize(n);
    for (std::size_t i = 0; i < n; ++i) ht_[i].assign(shape_.dim(i), level);
    rebuild_hsum();
  }

  std::size_t marginal_count() const { return prob_.marginals.count(); }

  void rebuild_hsum() {
    hsum_.assign(shape_.total(), 0.0);
    for (std::size_t i = 0; i < marginal_count(); ++i)
      for (std::size_t a = 0; a < shape_.dim(i); ++a) {
        const double v = ht_[i][a];
        shape_.for_each_in_slice(i, a, [&](std::size_t f) { hsum_[f] += v; });
      }
  }

  // One scalar root solve: the unique v with
  //   sum_k psi'(v + base_k) pw_k = w_a.
  double solve_atom(std::size_t i, std::size_t a, std::vector<double>& base,
                    std::vector<double>& weights) const {
    gather_slice(i, a, base, weights);
    const double wa = prob_.marginals.marginal(i).weight(a);
    const double warm = ht_[i][a];

    if (prob_.divergence.kind() == DivergenceKind::Entropic) {
      const double v = entropic_closed_form(i, a, wa);
      if (opts_.debug_check_closed_form) {
        const double vg = generic_root(base, weights, wa, warm);
        if (std::abs(v - vg) > 1e-10)
          throw numeric_error("entropic closed form disagrees with root finder by " +
                              std::to_string(std::abs(v - vg)));
      }
      return v;
    }
    return generic_root(base, weights, wa, warm);
  }

  // Full block sweep (round-robin over marginals; within a marginal the
  // atoms are independent, so Jacobi mode just threads the atom loop).
  void sweep() {
    const std::size_t jobs = opts_.sweep == SweepMode::Jacobi ? std::max<std::size_t>(1, opts_.jobs) : 1;
    for (std::size_t i = 0; i < marginal_count(); ++i) {
      const std::size_t n_i = shape_.dim(i);
      std::vector<double> fresh(n_i);
      parallel_for(n_i, jobs, [&](std::size_t a) {
        std::vector<double> base, weights;
        fresh[a] = solve_atom(i, a, base, weights);
      });
      // commit in atom order; slices are disjoint so this is exact
      for (std::size_t a = 0; a < n_i; ++a) {
        const double delta = fresh[a] - ht_[i][a];
        if (delta != 0.0) {
          ht_[i][a] = fresh[a];
          shape_.for_each_in_slice(i, a, [&](std::size_t f) { hsum_[f] += delta; });
        }
      }
    }
  }

  // max_i max_a |F_i(a) - 1|
  double residual() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < marginal_count(); ++i) {
      for (std::size_t a = 0; a < shape_.dim(i); ++a) {
        KahanSum s;
        shape_.for_each_in_slice(i, a, [&](std::size_t f) {
          s.add(prob_.divergence.psi_prime(hsum_[f] - ct_[f]) * pw_[f]);
        });
        const double F = s.value() / prob_.marginals.marginal(i).weight(a);
        worst = std::max(worst, std::abs(F - 1.0));
      }
    }
    return worst;
  }

  // Rescaled primal/dual objective values of the current iterate.
  void values(double& primal, double& dual) const {
    KahanSum ps, ds;
    for (std::size_t f = 0; f < shape_.total(); ++f) {
      const double arg = hsum_[f] - ct_[f];
      const double rho = prob_.divergence.psi_prime(arg);
      ps.add((ct_[f] * rho + prob_.divergence.phi(rho)) * pw_[f]);
      ds.add((hsum_[f] - prob_.divergence.psi(arg)) * pw_[f]);
    }
    primal = ps.value();
    dual = ds.value();
  }

  std::vector<double> density() const {
    std::vector<double> rho(shape_.total());
    for (std::size_t f = 0; f < shape_.total(); ++f)
      rho[f] = prob_.divergence.psi_prime(hsum_[f] - ct_[f]);
    return rho;
  }

  // Shift potentials so the mu_i-means agree across marginals; the direct
  // sum h(+) is unchanged because the shifts cancel.
  std::vector<double> normalize_means() {
    const std::size_t n = marginal_count();
    std::vector<double> means(n, 0.0);
    double grand = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      KahanSum s;
      for (std::size_t a = 0; a < shape_.dim(i); ++a)
        s.add(ht_[i][a] * prob_.marginals.marginal(i).weight(a));
      means[i] = s.value();
      grand += means[i];
    }
    grand /= static_cast<double>(n);
    std::vector<double> offsets(n);
    for (std::size_t i = 0; i < n; ++i) {
      offsets[i] = grand - means[i];
      for (double& v : ht_[i]) v += offsets[i];
    }
    return offsets;
  }

  const std::vector<std::vector<double>>& potentials() const { return ht_; }
  std::vector<std::vector<double>>& potentials() { return ht_; }
  const ProblemSpec& problem() const { return prob_; }

  // Rescaled primal objective of an arbitrary mass tensor on this problem.
  double primal_of_mass(const std::vector<double>& mass) const {
    KahanSum s;
    for (std::size_t f = 0; f < shape_.total(); ++f)
      s.add(ct_[f] * mass[f] + prob_.divergence.phi(mass[f] / pw_[f]) * pw_[f]);
    return s.value();
  }

private:
  void gather_slice(std::size_t i, std::size_t a, std::vector<double>& base,
                    std::vector<double>& weights) const {
    const std::size_t count = shape_.total() / shape_.dim(i);
    base.resize(count);
    weights.resize(count);
    const double own = ht_[i][a];
    std::size_t k = 0;
    shape_.for_each_in_slice(i, a, [&](std::size_t f) {
      base[k] = hsum_[f] - own - ct_[f];
      weights[k] = pw_[f];
      ++k;
    });
  }

  // v = log w_a + 1 - logsumexp_k(base_k + log pw_k); exact fixed point of
  // the exponential psi'.
  double entropic_closed_form(std::size_t i, std::size_t a, double wa) const {
    const double own = ht_[i][a];
    double m = -std::numeric_limits<double>::infinity();
    shape_.for_each_in_slice(i, a, [&](std::size_t f) {
      m = std::max(m, hsum_[f] - own - ct_[f] + log_pw_[f]);
    });
    KahanSum s;
    shape_.for_each_in_slice(i, a, [&](std::size_t f) {
      s.add(std::exp(hsum_[f] - own - ct_[f] + log_pw_[f] - m));
    });
    return std::log(wa) + 1.0 - (m + std::log(s.value()));
  }

  double generic_root(const std::vector<double>& base, const std::vector<double>& weights,
                      double wa, double warm) const {
    const auto& div = prob_.divergence;
    auto f = [&](double v) {
      KahanSum s;
      for (std::size_t k = 0; k < base.size(); ++k) s.add(div.psi_prime(v + base[k]) * weights[k]);
      return s.value() - wa;
    };
    auto fp = [&](double v) {
      KahanSum s;
      for (std::size_t k = 0; k < base.size(); ++k) s.add(div.psi_second(v + base[k]) * weights[k]);
      return s.value();
    };
    RootOptions ro;
    ro.f_tol = opts_.root_tol * wa;
    return find_monotone_root(f, fp, warm, ro);
  }

  ProblemSpec prob_;
  SolverOptions opts_;
  TensorShape shape_;
  std::vector<double> pw_, log_pw_, ct_, hsum_;
  std::vector<std::vector<double>> ht_;
};

}  // namespace detail

// Block dual ascent for the DOT problem.  Internally rescales c <- c/eps
// (equivalent problem with eps = 1), iterates round-robin scalar-root
// updates until the first-order residual meets opts.tol, then reports the
// density coupling psi'(h(+) - c~) and the primal/dual pair in original
// units.  A converged solve keeps sweeping while the reported gap is below
// -1e-12, so weak duality holds in the reported numbers.
inline Solution solve(const ProblemSpec& prob, const SolverOptions& opts = {}) {
  detail::DotSolverState state(prob, opts);

  double res = std::numeric_limits<double>::infinity();
  double primal = 0.0, dual = 0.0;
  bool converged = false;
  std::size_t iter = 0;
  std::vector<IterationTrace> trace;
  while (iter < opts.max_iters) {
    state.sweep();
    ++iter;
    res = state.residual();
    if (opts.record_trace) {
      IterationTrace t;
      t.residual = res;
      double p_unused, d;
      state.values(p_unused, d);
      t.dual_value = prob.epsilon * d;
      const Coupling rounded =
          round_to_feasible(Coupling::from_density(prob.marginals, state.density()));
      t.rounded_primal_value = prob.epsilon * state.primal_of_mass(rounded.mass());
      trace.push_back(t);
    }
    if (res <= opts.tol) {
      state.values(primal, dual);
      const double gap = prob.epsilon * (primal - dual);
      if (gap >= -1e-12 || res <= 1e-14) {
        converged = true;
        break;
      }
    }
  }
  if (!converged && res > opts.tol)
    throw convergence_error("solver hit iteration limit " + std::to_string(opts.max_iters) +
                                " with residual " + std::to_string(res),
                            res);
  if (!converged) state.values(primal, dual);

  Solution sol;
  const std::vector<double> offsets = state.normalize_means();
  sol.coupling = Coupling::from_density(prob.marginals, state.density());
  sol.potentials.h.resize(state.marginal_count());
  sol.potentials.normalization_offsets.resize(state.marginal_count());
  for (std::size_t i = 0; i < state.marginal_count(); ++i) {
    sol.potentials.h[i] = state.potentials()[i];
    for (double& v : sol.potentials.h[i]) v *= prob.epsilon;
    sol.potentials.normalization_offsets[i] = offsets[i] * prob.epsilon;
  }
  sol.primal_value = prob.epsilon * primal;
  sol.dual_value = prob.epsilon * dual;
  sol.gap = sol.primal_value - sol.dual_value;
  sol.iterations = iter;
  sol.max_residual = res;
  sol.trace = std::move(trace);
  return sol;
}

// Single dual update: the unique v with
//   sum_{x^-i} psi'(v + h^-i(x^-i) - c~(x_i, x^-i)) P^-i(x^-i) = 1
// for the rescaled problem (pass potentials in rescaled units).
inline double root_update(const ProblemSpec& prob, std::size_t i, std::size_t atom,
                          const std::vector<std::vector<double>>& h_rescaled,
                          const SolverOptions& opts = {}) {
  detail::DotSolverState state(prob, opts);
  if (h_rescaled.size() != state.marginal_count())
    throw config_error("root_update: potential count mismatch");
  state.potentials() = h_rescaled;
  state.rebuild_hsum();
  std::vector<double> base, weights;
  return state.solve_atom(i, atom, base, weights);
}

// integral(c dpi) + eps * sum phi(rho) P for a coupling on the problem's
// marginals; +inf when pi puts mass where P vanishes.
inline double objective(const Coupling& pi, const ProblemSpec& prob) {
  if (!(pi.shape() == prob.marginals.shape()))
    throw config_error("objective: coupling shape mismatch");
  const auto& c = prob.cost.tensor();
  const std::vector<double> pw = prob.marginals.product_weights();
  KahanSum cost_term, div_term;
  for (std::size_t f = 0; f < pw.size(); ++f) {
    if (pw[f] <= 0.0 && pi.mass()[f] > 0.0) return std::numeric_limits<double>::infinity();
    cost_term.add(c[f] * pi.mass()[f]);
    div_term.add(prob.divergence.phi(pi.density()[f]) * pw[f]);
  }
  return cost_term.value() + prob.epsilon * div_term.value();
}

// Per-marginal max difference quotient |h_i(x) - h_i(x')| / d(x, x') of the
// reported (eps-level) potentials; single-atom marginals report 0.
inline std::vector<double> potential_lipschitz(const DualPotentials& pot,
                                               const MarginalTuple& marginals) {
  std::vector<double> out(pot.h.size(), 0.0);
  for (std::size_t i = 0; i < pot.h.size(); ++i) {
    const auto& m = marginals.marginal(i);
    double q = 0.0;
    for (std::size_t a = 0; a < m.size(); ++a)
      for (std::size_t b = a + 1; b < m.size(); ++b) {
        const double d = euclidean_dist(m.point(a), m.point(b));
        if (d > 0.0) q = std::max(q, std::abs(pot.h[i][a] - pot.h[i][b]) / d);
      }
    out[i] = q;
  }
  return out;
}

}  // namespace dot
