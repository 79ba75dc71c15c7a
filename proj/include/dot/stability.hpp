#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "dot/coupling.hpp"
#include "dot/dot_solver.hpp"
#include "dot/error.hpp"
#include "dot/exact_ot.hpp"
#include "dot/measure.hpp"
#include "dot/numerics.hpp"
#include "dot/parallel.hpp"
#include "dot/rng.hpp"

namespace dot {

// ---------------------------------------------------------------------------
// Random feasible couplings (the testable surrogate for "all of Pi(mu)")

// IPF-projected exponential-noise tensor, mixed with a base coupling by a
// random convex weight.
inline Coupling random_feasible_coupling(const MarginalTuple& marginals, const Coupling& base,
                                         Rng& rng, double noise_scale = 1.0) {
  std::vector<double> t(marginals.product_size());
  for (auto& v : t) v = std::exp(noise_scale * rng.gaussian());
  const Coupling q = ipf_project(std::move(t), marginals, 1e-10);
  const double mix = rng.uniform01();
  std::vector<double> mass(q.mass().size());
  for (std::size_t f = 0; f < mass.size(); ++f)
    mass[f] = (1.0 - mix) * base.mass()[f] + mix * q.mass()[f];
  return Coupling(marginals, std::move(mass));
}

// ---------------------------------------------------------------------------
// Strong convexity certificate

struct StrongConvexityResult {
  double lhs = 0.0;       // |rho (pi* - pi)|_TV^2
  double rhs = 0.0;       // 4 max(l1,l2) int rho^2 d(P+pi*+pi) (F(pi)-F(pi*))
  double f_gap = 0.0;     // F(pi) - F(pi*), rescaled units
  bool ok = false;
};

// Checks  |rho (pi* - pi)|_TV^2 <= 4 max(l1,l2) (int rho^2 d(P+pi*+pi))
//         (F(pi) - F(pi*))
// with rho(x) = d_{X,q}(x0, x)^q anchored at the product atom x0_index.
// Both objective values are evaluated at the rescaled (eps = 1) level, the
// scale at which the (lambda1, lambda2) certificate of phi applies.
inline StrongConvexityResult strong_convexity_check(const ProblemSpec& prob, const Coupling& pi,
                                                    double q, const Solution& solved,
                                                    std::size_t x0_index = 0) {
  if (!(pi.shape() == prob.marginals.shape()))
    throw config_error("strong_convexity_check: coupling shape mismatch");
  if (pi.feasibility_residual() > 1e-7)
    throw config_error("strong_convexity_check: coupling is not feasible for the marginals");
  auto [l1, l2] = prob.divergence.convexity_params();

  const TensorShape shape = prob.marginals.shape();
  const std::vector<double> pw = prob.marginals.product_weights();
  std::vector<double> rho_w(shape.total());
  for (std::size_t f = 0; f < shape.total(); ++f) {
    // d_{X,q}(x0, x)^q = sum_i d(x0_i, x_i)^q
    rho_w[f] = 0.0;
    for (std::size_t i = 0; i < prob.marginals.count(); ++i) {
      const std::size_t a0 = shape.axis_index(x0_index, i);
      const std::size_t a = shape.axis_index(f, i);
      rho_w[f] +=
          std::pow(euclidean_dist(prob.marginals.marginal(i).point(a0),
                                  prob.marginals.marginal(i).point(a)),
                   q);
    }
  }

  const auto& star = solved.coupling;
  KahanSum tv, moment;
  for (std::size_t f = 0; f < shape.total(); ++f) {
    tv.add(rho_w[f] * std::abs(star.mass()[f] - pi.mass()[f]));
    moment.add(rho_w[f] * rho_w[f] * (pw[f] + star.mass()[f] + pi.mass()[f]));
  }

  // rescaled objective F~(pi) = int c/eps dpi + D_phi(pi, P)
  auto rescaled_objective = [&](const Coupling& c) {
    KahanSum s;
    for (std::size_t f = 0; f < shape.total(); ++f) {
      s.add(prob.cost.tensor()[f] / prob.epsilon * c.mass()[f]);
      s.add(prob.divergence.phi(c.density()[f]) * pw[f]);
    }
    return s.value();
  };

  StrongConvexityResult out;
  out.lhs = sqr(tv.value());
  out.f_gap = rescaled_objective(pi) - rescaled_objective(star);
  out.rhs = 4.0 * std::max(l1, l2) * moment.value() * out.f_gap;
  const double scale = std::max({1.0, out.lhs, out.rhs});
  out.ok = out.lhs <= out.rhs + 1e-9 * scale;
  return out;
}

// ---------------------------------------------------------------------------
// Marginal perturbations

enum class PerturbKind { JitterPositions, DirichletWeights, Translate };

struct PerturbSpec {
  PerturbKind kind = PerturbKind::JitterPositions;
};

namespace detail {

inline std::vector<double> random_direction(Rng& rng, std::size_t d) {
  std::vector<double> v(d);
  double norm = 0.0;
  do {
    norm = 0.0;
    for (auto& c : v) {
      c = rng.gaussian();
      norm += c * c;
    }
  } while (norm < 1e-12);
  norm = std::sqrt(norm);
  for (auto& c : v) c /= norm;
  return v;
}

}  // namespace detail

// Perturbs every marginal, keeping atom counts fixed.  For the jitter and
// translate kinds every atom moves by exactly `amplitude`, so the tuple
// distance obeys Delta <= N^(1/p) * amplitude with equality when the
// identity map stays optimal.
inline MarginalTuple perturb_marginals(const MarginalTuple& t, const PerturbSpec& spec,
                                       double amplitude, std::uint64_t seed) {
  std::vector<DiscreteMeasure> out;
  for (std::size_t i = 0; i < t.count(); ++i) {
    const auto& m = t.marginal(i);
    Rng rng(derive_seed(seed, 0x7e7, i));
    switch (spec.kind) {
      case PerturbKind::JitterPositions: {
        std::vector<std::vector<double>> pts = m.points_list();
        for (int attempt = 0; attempt < 64; ++attempt) {
          std::vector<std::vector<double>> moved(pts);
          for (auto& p : moved) {
            const auto dir = detail::random_direction(rng, m.dim());
            for (std::size_t k = 0; k < p.size(); ++k) p[k] += amplitude * dir[k];
          }
          try {
            out.emplace_back(std::move(moved), m.weights());
            break;
          } catch (const config_error&) {
            // atom collision after the move; redraw directions
            if (attempt == 63) throw;
          }
        }
        break;
      }
      case PerturbKind::Translate: {
        const auto dir = detail::random_direction(rng, m.dim());
        std::vector<std::vector<double>> pts = m.points_list();
        for (auto& p : pts)
          for (std::size_t k = 0; k < p.size(); ++k) p[k] += amplitude * dir[k];
        out.emplace_back(std::move(pts), m.weights());
        break;
      }
      case PerturbKind::DirichletWeights: {
        std::vector<double> dir(m.size());
        double s = 0.0;
        for (auto& x : dir) {
          x = rng.exponential();
          s += x;
        }
        std::vector<double> w(m.size());
        double acc = 0.0;
        for (std::size_t a = 0; a + 1 < m.size(); ++a) {
          w[a] = (1.0 - amplitude) * m.weight(a) + amplitude * dir[a] / s;
          acc += w[a];
        }
        w[m.size() - 1] = 1.0 - acc;
        out.emplace_back(m.points_list(), std::move(w));
        break;
      }
    }
  }
  return MarginalTuple(out, t.metric_p());
}

// ---------------------------------------------------------------------------
// Value continuity  |OT(mu) - OT(mu~)| <= L W_p(mu; mu~)

struct ValueContinuityResult {
  double value = 0.0;
  double value_tilde = 0.0;
  double delta = 0.0;
  double lipschitz = 0.0;
  bool ok = false;
};

inline ValueContinuityResult value_continuity_check(const ProblemSpec& prob,
                                                    const MarginalTuple& tilde,
                                                    const SolverOptions& opts = {}) {
  ProblemSpec tp{tilde, prob.cost.rebind(tilde), prob.divergence, prob.epsilon, prob.capacity};
  ValueContinuityResult out;
  out.value = solve(prob, opts).primal_value;
  out.value_tilde = solve(tp, opts).primal_value;
  out.delta = marginal_tuple_distance(prob.marginals, tilde, prob.marginals.metric_p());
  out.lipschitz = CostSpec::formula_lipschitz_joint(prob.cost.kind(), prob.cost.power(),
                                                    prob.marginals, tilde,
                                                    prob.marginals.metric_p());
  out.ok = std::abs(out.value - out.value_tilde) <= out.lipschitz * out.delta * (1.0 + 1e-6);
  return out;
}

// ---------------------------------------------------------------------------
// Stability experiment (Hoelder bound for optimizers)

struct StabilityRow {
  double delta_target = 0.0;
  double delta = 0.0;       // realized W_p(mu; mu~)
  double wq = 0.0;          // W_q(pi*, pi~*)
  double ratio = 0.0;       // (wq - N^(1/q-1/p) delta)_+ / (L delta)^(1/(2q))
  double value = 0.0;
  double value_tilde = 0.0;
  double lipschitz = 0.0;   // joint-hull constant used for this level
};

struct StabilityReport {
  std::vector<StabilityRow> rows;
  double slope = 0.0;      // log-log slope of wq against delta
  double lipschitz = 0.0;  // L used in the ratio
  double q = 0.0;
};

// Solves the base problem once, then re-solves under perturbations at each
// target level and measures the coupling displacement.  Levels are
// independent given the seed and run in parallel.
inline StabilityReport stability_experiment(const ProblemSpec& prob, const PerturbSpec& perturb,
                                            double q, const std::vector<double>& levels,
                                            std::uint64_t seed, const SolverOptions& opts = {},
                                            std::size_t jobs = 1) {
  const double p = prob.marginals.metric_p();
  if (!(q >= 1.0 && q <= p)) throw config_error("stability_experiment: requires 1 <= q <= p");
  const Solution base = solve(prob, opts);
  const double n_factor =
      std::pow(static_cast<double>(prob.marginals.count()), 1.0 / q - 1.0 / p);

  StabilityReport report;
  report.q = q;
  report.rows.resize(levels.size());
  std::vector<std::string> failures(levels.size());

  parallel_for(levels.size(), jobs, [&](std::size_t k) {
    StabilityRow row;
    row.delta_target = levels[k];
    try {
      const double amplitude =
          levels[k] / std::pow(static_cast<double>(prob.marginals.count()), 1.0 / p);
      const MarginalTuple tilde =
          perturb_marginals(prob.marginals, perturb, amplitude, derive_seed(seed, k));
      ProblemSpec tp{tilde, prob.cost.rebind(tilde), prob.divergence, prob.epsilon, prob.capacity};
      const Solution moved = solve(tp, opts);
      row.delta = marginal_tuple_distance(prob.marginals, tilde, p);
      row.wq = coupling_distance(base.coupling, moved.coupling, q);
      row.value = base.primal_value;
      row.value_tilde = moved.primal_value;
      row.lipschitz = CostSpec::formula_lipschitz_joint(prob.cost.kind(), prob.cost.power(),
                                                        prob.marginals, tilde, p);
      if (row.delta > 0.0)
        row.ratio = std::max(0.0, row.wq - n_factor * row.delta) /
                    std::pow(row.lipschitz * row.delta, 1.0 / (2.0 * q));
    } catch (const std::exception& e) {
      failures[k] = "level " + std::to_string(levels[k]) + ": " + e.what();
    }
    report.rows[k] = row;
  });
  for (const auto& f : failures)
    if (!f.empty()) throw convergence_error("stability_experiment: " + f, 0.0);
  for (const auto& row : report.rows) report.lipschitz = std::max(report.lipschitz, row.lipschitz);

  std::vector<double> lx, ly;
  for (const auto& row : report.rows)
    if (row.delta > 0.0 && row.wq > 0.0) {
      lx.push_back(std::log(row.delta));
      ly.push_back(std::log(row.wq));
    }
  report.slope = fit_line(lx, ly).slope;
  return report;
}

// The standard jitter suite: ten-point uniform marginals on [0,1], the
// degenerate cost |x2 - x1| (whose unregularized optimal face is flat, so
// optimizers genuinely move at the Hoelder rate), entropic divergence at
// eps = 0.05, q = p = 2, position jitter at levels 2^-3 ... 2^-8.
struct StabilitySuite {
  ProblemSpec problem;
  PerturbSpec perturbation;
  double q = 2.0;
  std::vector<double> levels;
};

inline StabilitySuite standard_stability_suite() {
  StabilitySuite s;
  MarginalTuple t({DiscreteMeasure::uniform_line(10), DiscreteMeasure::uniform_line(10)}, 2.0);
  s.problem = ProblemSpec{t, CostSpec::power_distance(t, 1.0), DivergenceSpec::entropic(), 0.05};
  s.perturbation.kind = PerturbKind::JitterPositions;
  for (int k = 3; k <= 8; ++k) s.levels.push_back(std::pow(2.0, -k));
  return s;
}

}  // namespace dot
