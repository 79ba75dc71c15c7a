#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "dot/dot_solver.hpp"
#include "dot/error.hpp"
#include "dot/measure.hpp"
#include "dot/numerics.hpp"
#include "dot/parallel.hpp"
#include "dot/rng.hpp"

namespace dot {

// Monte-Carlo estimate of the plug-in error  E |OT(mu) - OT(mu^_n)|  over a
// grid of sample sizes, with a log-log slope fit and a bootstrap interval.
struct RateReport {
  std::vector<std::size_t> n_values;
  std::vector<double> mean_abs_errors;
  std::vector<std::vector<double>> errors;  // per n, per surviving replication
  std::size_t replications = 0;
  double slope = 0.0;
  double slope_lo = 0.0, slope_hi = 0.0;  // bootstrap 95% interval
  bool excluded_smallest_n = false;       // lack-of-fit rule fired
  double reference_value = 0.0;
  double reference_bias = 0.0;  // |reference - coarse reference|, 0 if no coarse problem given
  bool bias_ok = true;          // bias < 10% of the smallest mean error
  std::size_t failures = 0;
};

struct RateRunConfig {
  ProblemSpec reference;                // ground-truth proxy on a fine discretization
  const ProblemSpec* coarse_reference = nullptr;  // optional, for the bias estimate
  std::vector<SamplerSpec> samplers;    // one per marginal
  std::vector<std::size_t> n_values;
  std::size_t replications = 20;
  std::uint64_t seed = 1;
  SolverOptions solver;
  std::size_t jobs = 1;
  std::size_t bootstrap_draws = 200;
};

namespace detail {

// slope of log mean-error against log n, optionally dropping index 0
inline double rate_slope(const std::vector<std::size_t>& ns, const std::vector<double>& means,
                         bool drop_first) {
  std::vector<double> x, y;
  for (std::size_t i = drop_first ? 1 : 0; i < ns.size(); ++i) {
    if (means[i] > 0.0) {
      x.push_back(std::log(static_cast<double>(ns[i])));
      y.push_back(std::log(means[i]));
    }
  }
  return fit_line(x, y).slope;
}

}  // namespace detail

inline RateReport sample_complexity_run(const RateRunConfig& cfg) {
  if (cfg.samplers.size() != cfg.reference.marginals.count())
    throw config_error("sample_complexity_run: one sampler per marginal required");
  if (cfg.n_values.empty() || cfg.replications == 0)
    throw config_error("sample_complexity_run: empty n grid or zero replications");
  for (std::size_t i = 1; i < cfg.n_values.size(); ++i)
    if (cfg.n_values[i] <= cfg.n_values[i - 1])
      throw config_error("sample_complexity_run: n_values must be increasing");

  RateReport report;
  report.n_values = cfg.n_values;
  report.replications = cfg.replications;
  report.reference_value = solve(cfg.reference, cfg.solver).primal_value;
  if (cfg.coarse_reference)
    report.reference_bias =
        std::abs(report.reference_value - solve(*cfg.coarse_reference, cfg.solver).primal_value);

  const std::size_t n_count = cfg.n_values.size();
  const std::size_t tasks = n_count * cfg.replications;
  std::vector<double> task_error(tasks, -1.0);  // -1 marks a failed replication

  parallel_for(tasks, cfg.jobs, [&](std::size_t task) {
    const std::size_t n_idx = task / cfg.replications;
    const std::size_t rep = task % cfg.replications;
    const std::size_t n = cfg.n_values[n_idx];
    try {
      std::vector<DiscreteMeasure> ms;
      for (std::size_t i = 0; i < cfg.samplers.size(); ++i)
        ms.push_back(empirical(cfg.samplers[i], n, derive_seed(cfg.seed, n_idx, rep, i)));
      MarginalTuple t(std::move(ms), cfg.reference.marginals.metric_p());
      ProblemSpec prob{t, cfg.reference.cost.rebind(t), cfg.reference.divergence,
                       cfg.reference.epsilon, cfg.reference.capacity};
      const double value = solve(prob, cfg.solver).primal_value;
      task_error[task] = std::abs(value - report.reference_value);
    } catch (const convergence_error&) {
      task_error[task] = -1.0;
    }
  });

  report.errors.assign(n_count, {});
  for (std::size_t n_idx = 0; n_idx < n_count; ++n_idx) {
    for (std::size_t rep = 0; rep < cfg.replications; ++rep) {
      const double e = task_error[n_idx * cfg.replications + rep];
      if (e < 0.0)
        ++report.failures;
      else
        report.errors[n_idx].push_back(e);
    }
    if (report.errors[n_idx].empty())
      throw convergence_error("sample_complexity_run: all replications failed at n = " +
                                  std::to_string(cfg.n_values[n_idx]),
                              0.0);
    report.mean_abs_errors.push_back(kahan_total(report.errors[n_idx]) /
                                     static_cast<double>(report.errors[n_idx].size()));
  }
  if (report.failures * 10 > tasks)
    throw convergence_error("sample_complexity_run: more than 10% of replications failed", 0.0);

  // lack-of-fit rule: drop the smallest n only on blatant pre-asymptotic
  // curvature (log-residual beyond 0.5 and three tail scatters), so that
  // fits stay comparable across divergences
  bool drop_first = false;
  if (cfg.n_values.size() >= 4) {
    std::vector<double> x, y;
    for (std::size_t i = 1; i < cfg.n_values.size(); ++i) {
      x.push_back(std::log(static_cast<double>(cfg.n_values[i])));
      y.push_back(std::log(std::max(report.mean_abs_errors[i], 1e-300)));
    }
    const LineFit tail = fit_line(x, y);
    const double pred0 = tail.intercept + tail.slope * std::log(static_cast<double>(cfg.n_values[0]));
    const double res0 = std::log(std::max(report.mean_abs_errors[0], 1e-300)) - pred0;
    drop_first = std::abs(res0) > std::max(3.0 * tail.rms_residual, 0.5);
  }
  report.excluded_smallest_n = drop_first;
  report.slope = detail::rate_slope(cfg.n_values, report.mean_abs_errors, drop_first);

  // bootstrap over replications (per n, resample errors with replacement)
  std::vector<double> slopes(cfg.bootstrap_draws);
  Rng brng(derive_seed(cfg.seed, 0xb001));
  for (std::size_t b = 0; b < cfg.bootstrap_draws; ++b) {
    std::vector<double> means(n_count);
    for (std::size_t i = 0; i < n_count; ++i) {
      const auto& errs = report.errors[i];
      KahanSum s;
      for (std::size_t r = 0; r < errs.size(); ++r) s.add(errs[brng.uniform_index(errs.size())]);
      means[i] = s.value() / static_cast<double>(errs.size());
    }
    slopes[b] = detail::rate_slope(cfg.n_values, means, drop_first);
  }
  std::sort(slopes.begin(), slopes.end());
  report.slope_lo = slopes[static_cast<std::size_t>(0.025 * (cfg.bootstrap_draws - 1))];
  report.slope_hi = slopes[static_cast<std::size_t>(0.975 * (cfg.bootstrap_draws - 1))];

  double smallest = report.mean_abs_errors.front();
  for (double m : report.mean_abs_errors) smallest = std::min(smallest, m);
  report.bias_ok = cfg.coarse_reference == nullptr || report.reference_bias < 0.1 * smallest;
  return report;
}

// ---------------------------------------------------------------------------
// Built-in rate experiments

// Second-marginal weight tilt: w proportional to prod_k (offset + x_k) over
// the atom coordinates.  A tilt makes the two marginals genuinely different,
// which keeps the linear (CLT) term of the plug-in error active; identical
// marginals suppress it and the error is dominated by second-order terms.
inline DiscreteMeasure tilt_weights(const DiscreteMeasure& base, double offset) {
  std::vector<double> w(base.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < base.size(); ++i) {
    double v = 1.0;
    for (double c : base.point(i)) v *= offset + c;
    if (!(v > 0.0)) throw config_error("weight tilt produced a nonpositive weight");
    w[i] = v;
    sum += v;
  }
  for (auto& x : w) x /= sum;
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < w.size(); ++i) acc += w[i];
  w[w.size() - 1] = 1.0 - acc;
  return DiscreteMeasure::from_flat(std::vector<double>(base.coords()), base.dim(), std::move(w));
}

inline DiscreteMeasure curve_grid(CurveKind kind, std::size_t m) {
  std::vector<std::vector<double>> pts;
  std::vector<double> w(m, 1.0 / static_cast<double>(m));
  for (std::size_t k = 0; k < m; ++k)
    pts.push_back(curve_point(kind, (static_cast<double>(k) + 0.5) / static_cast<double>(m)));
  return DiscreteMeasure(std::move(pts), std::move(w));
}

struct RateSetup {
  ProblemSpec reference;
  std::vector<SamplerSpec> samplers;
};

// Uniform cube in d dimensions with quadratic cost: reference marginals are
// the m^d midpoint grid and its tilted copy, sampled by exact resampling
// (the reference value then has no discretization proxy error; a fine-grid
// proxy for the continuum cannot push its bias below the sampling errors at
// desk scale within the cell capacity).
inline RateSetup cube_rate_setup(std::size_t d, std::size_t grid_per_axis, double tilt_offset,
                                 DivergenceSpec div, double eps,
                                 std::size_t capacity = 1100000) {
  const auto g1 = DiscreteMeasure::uniform_grid(d, grid_per_axis);
  const auto g2 = tilt_offset > 0.0 ? tilt_weights(g1, tilt_offset) : g1;
  MarginalTuple t({g1, g2}, 2.0);
  return RateSetup{ProblemSpec{t, CostSpec::sq_euclidean_sum(t), div, eps, capacity},
                   {SamplerSpec::resample(g1), SamplerSpec::resample(g2)}};
}

// Curve-supported marginals in R^3 (intrinsic dimension 1, ambient 3).
inline RateSetup curve_rate_setup(CurveKind kind, std::size_t grid_points, double tilt_offset,
                                  DivergenceSpec div, double eps,
                                  std::size_t capacity = 1100000) {
  const auto c1 = curve_grid(kind, grid_points);
  const auto c2 = tilt_offset > 0.0 ? tilt_weights(c1, tilt_offset) : c1;
  MarginalTuple t({c1, c2}, 2.0);
  return RateSetup{ProblemSpec{t, CostSpec::sq_euclidean_sum(t), div, eps, capacity},
                   {SamplerSpec::resample(c1), SamplerSpec::resample(c2)}};
}

// The headline intrinsic-dimension run: curve-supported marginals under the
// given divergence; ambient-dimension reasoning would predict the cube rate,
// the curve behaves one-dimensional.
inline RateReport intrinsic_dimension_demo(CurveKind kind, DivergenceSpec div, double eps,
                                           double tilt_offset,
                                           const std::vector<std::size_t>& n_values,
                                           std::size_t replications, std::uint64_t seed,
                                           std::size_t jobs = 1, std::size_t grid_points = 1000,
                                           const SolverOptions& solver = {}) {
  RateSetup setup = curve_rate_setup(kind, grid_points, tilt_offset, div, eps);
  RateRunConfig cfg;
  cfg.reference = setup.reference;
  cfg.samplers = setup.samplers;
  cfg.n_values = n_values;
  cfg.replications = replications;
  cfg.seed = seed;
  cfg.jobs = jobs;
  cfg.solver = solver;
  return sample_complexity_run(cfg);
}

}  // namespace dot
