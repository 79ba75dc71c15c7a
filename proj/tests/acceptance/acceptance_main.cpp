// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails.  Every tolerance and threshold is pinned here in code.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "dot/complexity.hpp"
#include "dot/config.hpp"
#include "dot/dot_solver.hpp"
#include "dot/exact_ot.hpp"
#include "dot/partition.hpp"
#include "dot/shadow.hpp"
#include "dot/stability.hpp"

using namespace dot;

namespace {

struct Gate {
  bool ok = true;
  std::vector<std::string> notes;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      notes.push_back(what);
    }
  }
  void note(const std::string& what) { notes.push_back(what); }
};

int g_failures = 0;

void report(int index, const std::string& name, const Gate& gate, double seconds) {
  std::printf("%s  criterion %2d  %-38s (%.1fs)", gate.ok ? "PASS" : "FAIL", index, name.c_str(),
              seconds);
  for (const auto& n : gate.notes) std::printf("  [%s]", n.c_str());
  std::printf("\n");
  std::fflush(stdout);
  if (!gate.ok) ++g_failures;
}

void run_criterion(int index, const std::string& name, const std::function<void(Gate&)>& body,
                   double max_seconds = 0.0) {
  Gate gate;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(gate);
  } catch (const std::exception& e) {
    gate.require(false, std::string("exception: ") + e.what());
  }
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (max_seconds > 0.0 && dt > max_seconds) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "runtime %.1fs > %.0fs", dt, max_seconds);
    gate.require(false, buf);
  }
  report(index, name, gate, dt);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

DiscreteMeasure random_measure(Rng& rng, std::size_t n, std::size_t d) {
  std::vector<std::vector<double>> pts;
  std::vector<double> w(n);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> p(d);
    for (auto& c : p) c = rng.uniform01();
    pts.push_back(std::move(p));
    w[i] = 0.2 + rng.uniform01();
    s += w[i];
  }
  for (auto& x : w) x /= s;
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) acc += w[i];
  w[n - 1] = 1.0 - acc;
  return DiscreteMeasure(std::move(pts), std::move(w));
}

// log-domain classical Sinkhorn, written independently of the solver path
struct SinkhornOracle {
  std::vector<double> coupling;
  double objective = 0.0;
};

SinkhornOracle classical_sinkhorn(const std::vector<double>& cost, std::size_t m, std::size_t n,
                                  const std::vector<double>& wr, const std::vector<double>& wc,
                                  double eps, double tol = 1e-13, int max_iters = 200000) {
  std::vector<double> f(m, 0.0), g(n, 0.0), lwr(m), lwc(n);
  for (std::size_t i = 0; i < m; ++i) lwr[i] = std::log(wr[i]);
  for (std::size_t j = 0; j < n; ++j) lwc[j] = std::log(wc[j]);
  for (int it = 0; it < max_iters; ++it) {
    for (std::size_t i = 0; i < m; ++i) {
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < n; ++j)
        mx = std::max(mx, (g[j] - cost[i * n + j]) / eps + lwc[j]);
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j)
        s += std::exp((g[j] - cost[i * n + j]) / eps + lwc[j] - mx);
      f[i] = -eps * (mx + std::log(s));
    }
    for (std::size_t j = 0; j < n; ++j) {
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < m; ++i)
        mx = std::max(mx, (f[i] - cost[i * n + j]) / eps + lwr[i]);
      double s = 0.0;
      for (std::size_t i = 0; i < m; ++i)
        s += std::exp((f[i] - cost[i * n + j]) / eps + lwr[i] - mx);
      g[j] = -eps * (mx + std::log(s));
    }
    double res = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j)
        s += wr[i] * wc[j] * std::exp((f[i] + g[j] - cost[i * n + j]) / eps);
      res = std::max(res, std::abs(s - wr[i]));
    }
    if (res <= tol) break;
  }
  SinkhornOracle out;
  out.coupling.resize(m * n);
  KahanSum cs, es;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double pij = wr[i] * wc[j] * std::exp((f[i] + g[j] - cost[i * n + j]) / eps);
      out.coupling[i * n + j] = pij;
      cs.add(cost[i * n + j] * pij);
      const double rho = pij / (wr[i] * wc[j]);
      es.add(wr[i] * wc[j] * (rho > 0 ? rho * std::log(rho) : 0.0));
    }
  out.objective = cs.value() + eps * es.value();
  return out;
}

// shared recipe of criteria 8 and 9 (resampled grid references; the second
// marginal carries a product weight tilt so the linear CLT term is active)
struct RateRecipe {
  std::vector<std::size_t> n_values = {32, 64, 128, 256, 512};
  std::size_t replications = Defaults::rate_replications;
  double eps = Defaults::rate_epsilon;
  std::uint64_t seed = Defaults::default_seed;
};

RateReport run_cube_rate(const RateRecipe& rec, DivergenceSpec div) {
  const RateSetup setup =
      cube_rate_setup(3, Defaults::rate_grid_per_axis, Defaults::rate_tilt_offset, div, rec.eps);
  RateRunConfig cfg;
  cfg.reference = setup.reference;
  cfg.samplers = setup.samplers;
  cfg.n_values = rec.n_values;
  cfg.replications = rec.replications;
  cfg.seed = rec.seed;
  cfg.jobs = 2;
  return sample_complexity_run(cfg);
}

RateReport run_helix_rate(const RateRecipe& rec, DivergenceSpec div) {
  const RateSetup setup = curve_rate_setup(CurveKind::Helix, Defaults::rate_curve_points,
                                           Defaults::rate_tilt_offset, div, rec.eps);
  RateRunConfig cfg;
  cfg.reference = setup.reference;
  cfg.samplers = setup.samplers;
  cfg.n_values = rec.n_values;
  cfg.replications = rec.replications;
  cfg.seed = rec.seed;
  cfg.jobs = 2;
  return sample_complexity_run(cfg);
}

std::optional<double> g_cube_alpha2_slope;  // shared between criteria 8 and 9

}  // namespace

int main() {
  // 1. Entropic oracle equivalence ------------------------------------------
  run_criterion(1, "entropic oracle equivalence", [](Gate& gate) {
    Rng rng(901);
    const double eps_cycle[3] = {0.05, 0.5, 5.0};
    double worst_value = 0.0, worst_entry = 0.0;
    for (int inst = 0; inst < 20; ++inst) {
      const std::size_t n = 5 + rng.uniform_index(26);
      const std::size_t m = 5 + rng.uniform_index(26);
      const double eps = eps_cycle[inst % 3];
      MarginalTuple t({random_measure(rng, n, 1), random_measure(rng, m, 1)}, 2.0);
      std::vector<double> cost(n * m);
      for (auto& c : cost) c = rng.uniform01();
      ProblemSpec prob{t, CostSpec::explicit_tensor(t, cost, 1.0), DivergenceSpec::entropic(),
                       eps};
      const Solution sol = solve(prob);
      const SinkhornOracle oracle = classical_sinkhorn(
          cost, n, m, t.marginal(0).weights(), t.marginal(1).weights(), eps);
      worst_value = std::max(worst_value, std::abs(sol.primal_value - oracle.objective));
      for (std::size_t k = 0; k < n * m; ++k)
        worst_entry = std::max(worst_entry, std::abs(sol.coupling.mass()[k] - oracle.coupling[k]));
    }
    gate.require(worst_value <= 1e-8, "objective diff " + fmt(worst_value));
    gate.require(worst_entry <= 1e-6, "coupling diff " + fmt(worst_entry));
    gate.note("value " + fmt(worst_value) + ", entry " + fmt(worst_entry));
  }, 5.0);

  // 2. First-order and duality certificates ---------------------------------
  run_criterion(2, "first-order and duality certificates", [](Gate& gate) {
    Rng rng(902);
    const std::vector<DivergenceSpec> kinds = {DivergenceSpec::entropic(),
                                               DivergenceSpec::alpha(1.5),
                                               DivergenceSpec::alpha(2.0)};
    double worst_res = 0.0, worst_gap = 0.0;
    for (const auto& div : kinds) {
      for (std::size_t N : {2u, 3u}) {
        for (int inst = 0; inst < 4; ++inst) {
          std::vector<DiscreteMeasure> ms;
          for (std::size_t i = 0; i < N; ++i)
            ms.push_back(random_measure(rng, 3 + rng.uniform_index(4), 2));
          MarginalTuple t(std::move(ms), 2.0);
          ProblemSpec prob{t, CostSpec::sq_euclidean_sum(t), div,
                           std::pow(10.0, rng.uniform(-1.0, 0.7))};
          const Solution sol = solve(prob);
          worst_res = std::max(worst_res, sol.max_residual);
          worst_gap = std::max(worst_gap,
                               std::abs(sol.gap) / std::max(1.0, std::abs(sol.primal_value)));
        }
      }
    }
    gate.require(worst_res <= 1e-9, "residual " + fmt(worst_res));
    gate.require(worst_gap <= 1e-6, "relative gap " + fmt(worst_gap));
    gate.note("residual " + fmt(worst_res) + ", rel gap " + fmt(worst_gap));
  });

  // 3. Figure-1 reproduction -------------------------------------------------
  run_criterion(3, "figure-1 support reproduction", [](Gate& gate) {
    MarginalTuple t({DiscreteMeasure::uniform_line(10), DiscreteMeasure::uniform_line(10)}, 2.0);
    auto solve_for = [&](DivergenceSpec div) {
      ProblemSpec prob{t, CostSpec::sq_euclidean_sum(t), div, Defaults::figure_epsilon};
      return solve(prob);
    };
    const Solution ent = solve_for(DivergenceSpec::entropic());
    gate.require(support_count(ent.coupling, 0.0) == 100, "entropic support not 100");
    for (double rho : ent.coupling.density())
      if (!(rho > 0.0)) gate.require(false, "entropic zero density cell");

    std::vector<std::size_t> sparse_counts;
    for (const auto& div : {DivergenceSpec::alpha(2.0), DivergenceSpec::alpha(1.5)}) {
      const Solution sol = solve_for(div);
      const std::size_t support = support_count(sol.coupling, 0.0);
      sparse_counts.push_back(support);
      gate.require(support < 100, div.name() + " support not < 100");
      double asym = 0.0;
      for (std::size_t i = 0; i < 10; ++i)
        for (std::size_t j = 0; j < 10; ++j)
          asym = std::max(asym, std::abs(sol.coupling.mass()[i * 10 + j] -
                                         sol.coupling.mass()[j * 10 + i]));
      gate.require(asym <= 1e-9, div.name() + " asymmetry " + fmt(asym));
    }
    // recorded, not gated: the caption reports 44 and 28
    gate.note("alpha(2) support " + std::to_string(sparse_counts[0]) + ", alpha(1.5) support " +
              std::to_string(sparse_counts[1]) + " (caption: 44, 28)");
  }, 1.0);

  // 4. Strong-convexity certification ----------------------------------------
  run_criterion(4, "strong-convexity certification", [](Gate& gate) {
    const std::vector<DivergenceSpec> kinds = {DivergenceSpec::entropic(),
                                               DivergenceSpec::alpha(1.5),
                                               DivergenceSpec::alpha(2.0)};
    for (std::size_t kind_idx = 0; kind_idx < kinds.size(); ++kind_idx) {
      const auto& div = kinds[kind_idx];
      Rng rng(derive_seed(904, kind_idx));
      std::size_t failures = 0;
      std::optional<ProblemSpec> prob;
      std::optional<Solution> sol;
      for (std::size_t pair = 0; pair < 200; ++pair) {
        if (pair % 4 == 0) {
          MarginalTuple t({random_measure(rng, 3 + rng.uniform_index(4), 2),
                           random_measure(rng, 3 + rng.uniform_index(4), 2)},
                          2.0);
          prob = ProblemSpec{t, CostSpec::sq_euclidean_sum(t), div,
                             std::pow(10.0, rng.uniform(-1.0, 0.5))};
          sol = solve(*prob);
        }
        const Coupling pi = random_feasible_coupling(prob->marginals, sol->coupling, rng);
        const auto res = strong_convexity_check(*prob, pi, pair % 2 == 0 ? 2.0 : 1.0, *sol);
        if (!res.ok) ++failures;
      }
      gate.require(failures == 0,
                   div.name() + ": " + std::to_string(failures) + "/200 failures");
    }
  }, 60.0);

  // 5. Stability experiment ---------------------------------------------------
  run_criterion(5, "optimizer stability experiment", [](Gate& gate) {
    const StabilitySuite suite = standard_stability_suite();
    const StabilityReport rep =
        stability_experiment(suite.problem, suite.perturbation, suite.q, suite.levels, 42, {}, 2);
    double rmin = std::numeric_limits<double>::infinity(), rmax = 0.0;
    for (const auto& row : rep.rows) {
      rmin = std::min(rmin, row.ratio);
      rmax = std::max(rmax, row.ratio);
    }
    gate.require(rmin > 0.0 && rmax / rmin < 10.0,
                 "ratio spread " + fmt(rmax / std::max(rmin, 1e-300)));
    gate.require(rep.slope >= 1.0 / (2.0 * suite.q) - 0.1, "slope " + fmt(rep.slope));
    gate.note("slope " + fmt(rep.slope) + ", ratio spread " + fmt(rmax / rmin));
  }, 300.0);

  // 6. Value continuity --------------------------------------------------------
  run_criterion(6, "value continuity bound", [](Gate& gate) {
    Rng rng(906);
    std::size_t failures = 0;
    for (int inst = 0; inst < 100; ++inst) {
      MarginalTuple t({random_measure(rng, 4 + rng.uniform_index(5), 2),
                       random_measure(rng, 4 + rng.uniform_index(5), 2)},
                      2.0);
      const bool quadratic = inst % 2 == 0;
      CostSpec cost = quadratic ? CostSpec::sq_euclidean_sum(t) : CostSpec::power_distance(t, 1.0);
      ProblemSpec prob{t, std::move(cost),
                       inst % 3 == 0 ? DivergenceSpec::alpha(2.0) : DivergenceSpec::entropic(),
                       std::pow(10.0, rng.uniform(-1.0, 0.5))};
      PerturbSpec spec;
      spec.kind = inst % 4 == 0 ? PerturbKind::Translate : PerturbKind::JitterPositions;
      const MarginalTuple tilde =
          perturb_marginals(t, spec, 0.005 + 0.05 * rng.uniform01(), derive_seed(906, inst));
      const auto res = value_continuity_check(prob, tilde);
      if (!res.ok) ++failures;
    }
    gate.require(failures == 0, std::to_string(failures) + "/100 bound violations");
  }, 60.0);

  // 7. Shadow properties --------------------------------------------------------
  run_criterion(7, "shadow properties", [](Gate& gate) {
    Rng rng(907);
    double worst_marginal = 0.0, worst_cost_slack = 0.0, worst_div_slack = 0.0;
    const std::vector<DivergenceSpec> kinds = {DivergenceSpec::entropic(),
                                               DivergenceSpec::alpha(1.5),
                                               DivergenceSpec::alpha(2.0)};
    for (int inst = 0; inst < 100; ++inst) {
      const std::size_t n1 = 3 + rng.uniform_index(3);
      const std::size_t n2 = 3 + rng.uniform_index(3);
      MarginalTuple t({random_measure(rng, n1, 2), random_measure(rng, n2, 2)}, 2.0);
      MarginalTuple tilde({random_measure(rng, n1, 2), random_measure(rng, n2, 2)}, 2.0);
      std::vector<double> tensor(t.product_size());
      for (auto& v : tensor) v = std::exp(rng.gaussian());
      const Coupling pi = ipf_project(std::move(tensor), t, 1e-12);
      const auto res = shadow(pi, tilde, 2.0, kinds[inst % kinds.size()]);
      worst_marginal = std::max(worst_marginal, res.shadow.feasibility_residual());
      worst_cost_slack = std::max(
          worst_cost_slack, res.transport_cost - marginal_tuple_distance(t, tilde, 2.0));
      worst_div_slack =
          std::max(worst_div_slack, res.divergence_after - res.divergence_before);
    }
    gate.require(worst_marginal <= 1e-8, "marginal residual " + fmt(worst_marginal));
    gate.require(worst_cost_slack <= 1e-9, "transport cost slack " + fmt(worst_cost_slack));
    gate.require(worst_div_slack <= 1e-9, "divergence slack " + fmt(worst_div_slack));
  });

  // 8. Sample-complexity slopes ---------------------------------------------------
  run_criterion(8, "sample-complexity slopes (cube)", [](Gate& gate) {
    RateRecipe rec;
    const RateReport ent = run_cube_rate(rec, DivergenceSpec::entropic());
    const RateReport a2 = run_cube_rate(rec, DivergenceSpec::alpha(2.0));
    g_cube_alpha2_slope = a2.slope;
    gate.require(ent.slope >= -0.70 && ent.slope <= -0.30, "entropic slope " + fmt(ent.slope));
    gate.require(a2.slope >= -0.55 && a2.slope <= -0.18, "alpha(2) slope " + fmt(a2.slope));
    gate.require(ent.slope <= a2.slope - 0.05,
                 "separation " + fmt(a2.slope - ent.slope) + " < 0.05");
    gate.note("entropic " + fmt(ent.slope) + ", alpha(2) " + fmt(a2.slope) + "; tilt " +
              fmt(Defaults::rate_tilt_offset) + ", eps " + fmt(rec.eps) + ", reps " +
              std::to_string(rec.replications) + ", seed " + std::to_string(rec.seed));
  }, 900.0);

  // 9. Intrinsic-dimension demonstration -------------------------------------------
  run_criterion(9, "intrinsic-dimension demonstration", [](Gate& gate) {
    RateRecipe rec;
    const RateReport helix = run_helix_rate(rec, DivergenceSpec::alpha(2.0));
    double cube_slope;
    if (g_cube_alpha2_slope) {
      cube_slope = *g_cube_alpha2_slope;
    } else {
      cube_slope = run_cube_rate(rec, DivergenceSpec::alpha(2.0)).slope;
    }
    gate.require(helix.slope >= -0.70 && helix.slope <= -0.30,
                 "helix slope " + fmt(helix.slope));
    gate.require(helix.slope <= cube_slope - 0.05,
                 "helix " + fmt(helix.slope) + " not steeper than cube " + fmt(cube_slope) +
                     " by 0.05");
    gate.note("helix " + fmt(helix.slope) + ", cube baseline " + fmt(cube_slope));
  }, 900.0);

  // 10. Potential regularity ---------------------------------------------------------
  run_criterion(10, "potential regularity across epsilon", [](Gate& gate) {
    MarginalTuple t({DiscreteMeasure::uniform_line(10), DiscreteMeasure::uniform_line(10)}, 2.0);
    for (double eps : {0.1, 1.0, 10.0}) {
      for (const auto& div : {DivergenceSpec::entropic(), DivergenceSpec::poly_dual(2)}) {
        ProblemSpec prob{t, CostSpec::sq_euclidean_sum(t), div, eps};
        const Solution sol = solve(prob);
        const auto quotients = potential_lipschitz(sol.potentials, t);
        for (std::size_t i = 0; i < quotients.size(); ++i) {
          const double bound = prob.cost.coordinate_lipschitz(i) * (1.0 + 1e-6);
          gate.require(quotients[i] <= bound, div.name() + " eps " + fmt(eps) + " quotient " +
                                                  fmt(quotients[i]) + " > " + fmt(bound));
        }
      }
    }
  });

  // 11. Partition certificates ----------------------------------------------------------
  run_criterion(11, "partition certificates", [](Gate& gate) {
    for (std::size_t d = 1; d <= 3; ++d) {
      for (double eps : {1.0, 1.0 / 3.0, 1.0 / 9.0, 1.0 / 27.0}) {
        const PartitionScheme p = dyadic_partition(d, eps);
        gate.require(static_cast<double>(p.cell_count()) <=
                         p.covering_constant() * std::pow(eps, -static_cast<double>(d)) *
                             (1 + 1e-12),
                     "count bound d=" + std::to_string(d) + " eps=" + fmt(eps));
        for (std::size_t f = 0; f < p.cell_count(); ++f)
          if (p.cell_diameter(f) > eps * (1.0 + 1e-9))
            gate.require(false, "diameter d=" + std::to_string(d) + " eps=" + fmt(eps));

        std::size_t T = 0;
        while (eps * std::pow(3.0, static_cast<double>(T + 1)) <= 1.0) ++T;
        if (T == 0) continue;
        const auto chain = refinement_chain(d, eps, T);
        const double k_chain =
            std::pow(6.0 * std::sqrt(static_cast<double>(d)), static_cast<double>(d));
        std::vector<double> flo, fhi, clo, chi;
        for (std::size_t ti = 1; ti <= chain.size(); ++ti) {
          const auto& level = chain[ti - 1];
          const double level_eps = std::pow(3.0, static_cast<double>(ti)) * eps;
          gate.require(static_cast<double>(level.cell_count()) <=
                           k_chain * std::pow(level_eps, -static_cast<double>(d)) * (1 + 1e-12),
                       "chain count bound");
          for (std::size_t f = 0; f < level.cell_count(); ++f)
            if (level.cell_diameter(f) > level_eps * (1.0 + 1e-9))
              gate.require(false, "chain diameter bound");
        }
        for (std::size_t li = 0; li + 1 < chain.size(); ++li) {
          const auto& fine = chain[li];
          const auto& coarse = chain[li + 1];
          for (std::size_t f = 0; f < fine.cell_count(); ++f) {
            const std::size_t parent = fine.parent_in(coarse, f);
            fine.cell_bounds(f, flo, fhi);
            coarse.cell_bounds(parent, clo, chi);
            for (std::size_t k = 0; k < d; ++k)
              if (flo[k] < clo[k] || fhi[k] > chi[k]) gate.require(false, "nesting violated");
          }
        }
      }
    }
  });

  std::printf("%d of 11 criteria failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
