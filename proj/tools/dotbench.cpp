// dotbench: divergence-regularized optimal transport experiments.
//
// Subcommands: solve, figure, stability, strong-convexity, complexity,
// intrinsic-demo.  Inputs are JSON configs; outputs are JSON/CSV/SVG files
// under --out.  Artifacts are byte-reproducible for a fixed config and
// seed; wall-clock metadata goes to run_meta.json only.
//
// Exit codes: 0 ok, 2 config error, 3 solver non-convergence, 4 capacity
// exceeded, 5 certification failure.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dot/config.hpp"
#include "dot/numerics.hpp"
#include "dot/svg.hpp"

namespace fs = std::filesystem;
using dot::json;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::optional<std::size_t> max_iters;
  std::size_t jobs = 1;
};

json load_config(const CommonArgs& args) {
  if (args.config_path.empty()) return json::object();
  std::ifstream in(args.config_path);
  if (!in) throw dot::config_error("cannot open config file: " + args.config_path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw dot::config_error("config parse error in " + args.config_path + ": " + e.what());
  }
}

dot::SolverOptions solver_options(const json& cfg, const CommonArgs& args) {
  dot::SolverOptions opts =
      dot::solver_options_from_json(cfg.contains("solver") ? cfg.at("solver") : json());
  if (args.tol) opts.tol = *args.tol;
  if (args.max_iters) opts.max_iters = *args.max_iters;
  if (args.jobs > 1) {
    opts.sweep = dot::SweepMode::Jacobi;
    opts.jobs = args.jobs;
  }
  return opts;
}

std::uint64_t pick_seed(const json& section, const json& cfg, const CommonArgs& args) {
  if (args.seed) return *args.seed;
  if (section.is_object() && section.contains("seed"))
    return section.at("seed").get<std::uint64_t>();
  if (cfg.contains("seed")) return cfg.at("seed").get<std::uint64_t>();
  return dot::Defaults::default_seed;
}

void write_run_meta(const CommonArgs& args, const std::string& command) {
  const auto now = std::chrono::system_clock::now().time_since_epoch();
  json meta{{"command", command},
            {"config", args.config_path},
            {"defaults_version", dot::Defaults::version},
            {"unix_time_ms",
             std::chrono::duration_cast<std::chrono::milliseconds>(now).count()}};
  dot::write_json_file((fs::path(args.out_dir) / "run_meta.json").string(), meta);
}

void prepare_out(const CommonArgs& args) { fs::create_directories(args.out_dir); }

std::string divergence_slug(const dot::DivergenceSpec& d) {
  switch (d.kind()) {
    case dot::DivergenceKind::Entropic:
      return "entropic";
    case dot::DivergenceKind::Alpha: {
      std::ostringstream os;
      os << "alpha_" << d.alpha_value();
      std::string s = os.str();
      std::replace(s.begin(), s.end(), '.', '_');
      return s;
    }
    case dot::DivergenceKind::PolyDual:
      return "poly_dual_" + std::to_string(static_cast<int>(d.beta_value()));
  }
  return "divergence";
}

// ---------------------------------------------------------------------------

int cmd_solve(const CommonArgs& args) {
  const json cfg = load_config(args);
  if (!cfg.contains("problem")) throw dot::config_error("solve requires a \"problem\" section");
  dot::ProblemSpec prob = dot::problem_from_json(cfg.at("problem"));
  const dot::Solution sol = dot::solve(prob, solver_options(cfg, args));
  prepare_out(args);
  dot::write_json_file((fs::path(args.out_dir) / "solution.json").string(), dot::to_json(sol));
  dot::write_text_file((fs::path(args.out_dir) / "coupling.csv").string(),
                       dot::coupling_csv(sol.coupling));
  write_run_meta(args, "solve");
  std::cout << "value " << sol.primal_value << " gap " << sol.gap << " iterations "
            << sol.iterations << "\n";
  return 0;
}

int cmd_figure(const CommonArgs& args) {
  const json cfg = load_config(args);
  const json fig = cfg.contains("figure") ? cfg.at("figure") : json::object();
  const std::size_t atoms =
      fig.contains("atoms") ? fig.at("atoms").get<std::size_t>() : dot::Defaults::figure_atoms;
  const double eps =
      fig.contains("epsilon") ? fig.at("epsilon").get<double>() : dot::Defaults::figure_epsilon;
  std::vector<dot::DivergenceSpec> divs;
  if (fig.contains("divergences")) {
    for (const auto& dj : fig.at("divergences")) divs.push_back(dot::divergence_from_json(dj));
  } else {
    divs = {dot::DivergenceSpec::entropic(), dot::DivergenceSpec::alpha(2.0),
            dot::DivergenceSpec::alpha(1.5)};
  }
  const double threshold = fig.contains("threshold") ? fig.at("threshold").get<double>() : 0.0;

  dot::MarginalTuple t(
      {dot::DiscreteMeasure::uniform_line(atoms), dot::DiscreteMeasure::uniform_line(atoms)},
      2.0);
  prepare_out(args);
  json summary = json::array();
  for (const auto& div : divs) {
    dot::ProblemSpec prob{t, dot::CostSpec::sq_euclidean_sum(t), div, eps};
    const dot::Solution sol = dot::solve(prob, solver_options(cfg, args));
    const std::size_t support = dot::support_count(sol.coupling, threshold);
    double asym = 0.0;
    for (std::size_t i = 0; i < atoms; ++i)
      for (std::size_t j = 0; j < atoms; ++j)
        asym = std::max(asym, std::abs(sol.coupling.mass()[i * atoms + j] -
                                       sol.coupling.mass()[j * atoms + i]));
    const std::string slug = divergence_slug(div);
    dot::write_text_file((fs::path(args.out_dir) / ("figure_" + slug + ".svg")).string(),
                         dot::coupling_heatmap_svg(
                             sol.coupling, div.name() + "  (support " + std::to_string(support) +
                                               " of " + std::to_string(atoms * atoms) + ")"));
    summary.push_back(json{{"divergence", div.name()},
                           {"support_count", support},
                           {"cells", atoms * atoms},
                           {"max_asymmetry", asym},
                           {"value", sol.primal_value},
                           {"gap", sol.gap},
                           {"iterations", sol.iterations}});
    std::cout << div.name() << " support " << support << "/" << atoms * atoms << "\n";
  }
  dot::write_json_file((fs::path(args.out_dir) / "figure_summary.json").string(),
                       json{{"epsilon", eps}, {"atoms", atoms}, {"runs", std::move(summary)}});
  write_run_meta(args, "figure");
  return 0;
}

int cmd_stability(const CommonArgs& args) {
  const json cfg = load_config(args);
  dot::StabilitySuite suite = dot::standard_stability_suite();
  if (cfg.contains("problem")) suite.problem = dot::problem_from_json(cfg.at("problem"));
  const json sj = cfg.contains("stability") ? cfg.at("stability") : json::object();
  if (sj.contains("q")) suite.q = sj.at("q").get<double>();
  if (sj.contains("levels")) suite.levels = sj.at("levels").get<std::vector<double>>();
  if (sj.contains("perturbation")) {
    const std::string k = sj.at("perturbation").get<std::string>();
    if (k == "jitter")
      suite.perturbation.kind = dot::PerturbKind::JitterPositions;
    else if (k == "dirichlet")
      suite.perturbation.kind = dot::PerturbKind::DirichletWeights;
    else if (k == "translate")
      suite.perturbation.kind = dot::PerturbKind::Translate;
    else
      throw dot::config_error("stability.perturbation must be jitter|dirichlet|translate");
  }
  const std::uint64_t seed = pick_seed(sj, cfg, args);

  const dot::StabilityReport rep =
      dot::stability_experiment(suite.problem, suite.perturbation, suite.q, suite.levels, seed,
                                solver_options(cfg, args), std::max<std::size_t>(1, args.jobs));
  prepare_out(args);
  dot::write_json_file((fs::path(args.out_dir) / "stability.json").string(), dot::to_json(rep));
  dot::write_text_file((fs::path(args.out_dir) / "stability.csv").string(),
                       dot::stability_csv(rep));
  std::vector<double> xs, ys, lx, ly;
  for (const auto& r : rep.rows)
    if (r.delta > 0 && r.wq > 0) {
      xs.push_back(r.delta);
      ys.push_back(r.wq);
      lx.push_back(std::log(r.delta));
      ly.push_back(std::log(r.wq));
    }
  if (xs.size() >= 2) {
    const dot::LineFit fit = dot::fit_line(lx, ly);
    dot::write_text_file(
        (fs::path(args.out_dir) / "stability_loglog.svg").string(),
        dot::loglog_plot_svg(xs, ys, "optimizer displacement against marginal perturbation",
                             "W_p between marginal tuples", "W_q between optimizers", fit.slope,
                             fit.intercept));
  }
  write_run_meta(args, "stability");
  std::cout << "slope " << rep.slope << " over " << rep.rows.size() << " levels\n";
  return 0;
}

int cmd_strong_convexity(const CommonArgs& args) {
  const json cfg = load_config(args);
  const json sj = cfg.contains("strong_convexity") ? cfg.at("strong_convexity") : json::object();
  const std::size_t pairs = sj.contains("pairs") ? sj.at("pairs").get<std::size_t>()
                                                 : dot::Defaults::strong_convexity_pairs;
  const std::uint64_t seed = pick_seed(sj, cfg, args);
  std::vector<dot::DivergenceSpec> kinds;
  if (sj.contains("divergences")) {
    for (const auto& dj : sj.at("divergences")) kinds.push_back(dot::divergence_from_json(dj));
  } else {
    kinds = {dot::DivergenceSpec::entropic(), dot::DivergenceSpec::alpha(1.5),
             dot::DivergenceSpec::alpha(2.0)};
  }

  prepare_out(args);
  json report = json::array();
  bool all_ok = true;
  for (std::size_t kind_idx = 0; kind_idx < kinds.size(); ++kind_idx) {
    const auto& div = kinds[kind_idx];
    std::size_t failures = 0, instances = 0;
    double min_slack = std::numeric_limits<double>::infinity();
    dot::Rng rng(dot::derive_seed(seed, 0x5c, kind_idx));
    std::optional<dot::ProblemSpec> prob;
    std::optional<dot::Solution> sol;
    for (std::size_t pair = 0; pair < pairs; ++pair) {
      if (pair % 4 == 0) {  // fresh instance every four couplings
        std::vector<dot::DiscreteMeasure> ms;
        for (int side = 0; side < 2; ++side) {
          const std::size_t n = 3 + rng.uniform_index(4);
          std::vector<std::vector<double>> pts;
          std::vector<double> w(n);
          double s = 0;
          for (std::size_t a = 0; a < n; ++a) {
            pts.push_back({rng.uniform01(), rng.uniform01()});
            w[a] = 0.2 + rng.uniform01();
            s += w[a];
          }
          for (auto& x : w) x /= s;
          double acc = 0;
          for (std::size_t a = 0; a + 1 < n; ++a) acc += w[a];
          w[n - 1] = 1.0 - acc;
          ms.emplace_back(std::move(pts), std::move(w));
        }
        dot::MarginalTuple t(std::move(ms), 2.0);
        prob = dot::ProblemSpec{t, dot::CostSpec::sq_euclidean_sum(t), div,
                                std::pow(10.0, rng.uniform(-1.0, 0.5))};
        sol = dot::solve(*prob, solver_options(cfg, args));
        ++instances;
      }
      const dot::Coupling pi = dot::random_feasible_coupling(prob->marginals, sol->coupling, rng);
      const double q = (pair % 2 == 0) ? 2.0 : 1.0;
      const auto res = dot::strong_convexity_check(*prob, pi, q, *sol);
      if (!res.ok) ++failures;
      min_slack = std::min(min_slack, res.rhs - res.lhs);
    }
    if (failures > 0) all_ok = false;
    report.push_back(json{{"divergence", div.name()},
                          {"pairs", pairs},
                          {"instances", instances},
                          {"failures", failures},
                          {"min_slack", min_slack}});
    std::cout << div.name() << ": " << pairs - failures << "/" << pairs << " ok\n";
  }
  dot::write_json_file((fs::path(args.out_dir) / "strong_convexity.json").string(),
                       json{{"seed", seed}, {"results", std::move(report)}});
  write_run_meta(args, "strong-convexity");
  if (!all_ok) throw dot::certification_error("strong convexity certificate failed");
  return 0;
}

void write_rate_outputs(const CommonArgs& args, const std::string& stem,
                        const dot::RateReport& rep) {
  dot::write_json_file((fs::path(args.out_dir) / (stem + ".json")).string(), dot::to_json(rep));
  dot::write_text_file((fs::path(args.out_dir) / (stem + ".csv")).string(), dot::rate_csv(rep));
  std::vector<double> xs, ys, lx, ly;
  for (std::size_t i = 0; i < rep.n_values.size(); ++i) {
    xs.push_back(static_cast<double>(rep.n_values[i]));
    ys.push_back(std::max(rep.mean_abs_errors[i], 1e-300));
    lx.push_back(std::log(xs[i]));
    ly.push_back(std::log(ys[i]));
  }
  const dot::LineFit fit = dot::fit_line(lx, ly);
  dot::write_text_file((fs::path(args.out_dir) / (stem + "_loglog.svg")).string(),
                       dot::loglog_plot_svg(xs, ys, "plug-in error against sample size", "n",
                                            "mean |error|", rep.slope, fit.intercept));
}

dot::RateRunConfig cube_rate_config(const json& rj, const json& cfg, const CommonArgs& args,
                                    dot::DivergenceSpec div) {
  const std::size_t m = rj.contains("grid_per_axis") ? rj.at("grid_per_axis").get<std::size_t>()
                                                     : dot::Defaults::rate_grid_per_axis;
  const double eps =
      rj.contains("epsilon") ? rj.at("epsilon").get<double>() : dot::Defaults::rate_epsilon;
  const double tilt = rj.contains("tilt_offset") ? rj.at("tilt_offset").get<double>()
                                                 : dot::Defaults::rate_tilt_offset;
  const dot::RateSetup setup = dot::cube_rate_setup(3, m, tilt, div, eps);
  dot::RateRunConfig rc;
  rc.reference = setup.reference;
  rc.samplers = setup.samplers;
  rc.n_values = rj.contains("n_values") ? rj.at("n_values").get<std::vector<std::size_t>>()
                                        : std::vector<std::size_t>{32, 64, 128, 256, 512};
  rc.replications = rj.contains("replications") ? rj.at("replications").get<std::size_t>()
                                                : dot::Defaults::rate_replications;
  rc.seed = pick_seed(rj, cfg, args);
  rc.solver = solver_options(cfg, args);
  rc.jobs = std::max<std::size_t>(1, args.jobs);
  return rc;
}

int cmd_complexity(const CommonArgs& args) {
  const json cfg = load_config(args);
  const json rj = cfg.contains("complexity") ? cfg.at("complexity") : json::object();
  const dot::DivergenceSpec div = rj.contains("divergence")
                                      ? dot::divergence_from_json(rj.at("divergence"))
                                      : dot::DivergenceSpec::entropic();
  prepare_out(args);
  const dot::RateRunConfig rc = cube_rate_config(rj, cfg, args, div);
  const dot::RateReport rep = dot::sample_complexity_run(rc);
  write_rate_outputs(args, "rate_" + divergence_slug(div), rep);
  write_run_meta(args, "complexity");
  std::cout << div.name() << " slope " << rep.slope << " ci [" << rep.slope_lo << ", "
            << rep.slope_hi << "]\n";
  return 0;
}

int cmd_intrinsic_demo(const CommonArgs& args) {
  const json cfg = load_config(args);
  const json rj = cfg.contains("intrinsic") ? cfg.at("intrinsic") : json::object();
  const dot::DivergenceSpec div = rj.contains("divergence")
                                      ? dot::divergence_from_json(rj.at("divergence"))
                                      : dot::DivergenceSpec::alpha(2.0);
  const std::size_t points = rj.contains("curve_points")
                                 ? rj.at("curve_points").get<std::size_t>()
                                 : dot::Defaults::rate_curve_points;
  const double tilt = rj.contains("tilt_offset") ? rj.at("tilt_offset").get<double>()
                                                 : dot::Defaults::rate_tilt_offset;
  const double eps =
      rj.contains("epsilon") ? rj.at("epsilon").get<double>() : dot::Defaults::rate_epsilon;
  prepare_out(args);

  const dot::RateSetup setup = dot::curve_rate_setup(dot::CurveKind::Helix, points, tilt, div, eps);
  dot::RateRunConfig crc;
  crc.reference = setup.reference;
  crc.samplers = setup.samplers;
  crc.n_values = rj.contains("n_values") ? rj.at("n_values").get<std::vector<std::size_t>>()
                                         : std::vector<std::size_t>{32, 64, 128, 256, 512};
  crc.replications = rj.contains("replications") ? rj.at("replications").get<std::size_t>()
                                                 : dot::Defaults::rate_replications;
  crc.seed = pick_seed(rj, cfg, args);
  crc.solver = solver_options(cfg, args);
  crc.jobs = std::max<std::size_t>(1, args.jobs);
  const dot::RateReport helix = dot::sample_complexity_run(crc);
  write_rate_outputs(args, "rate_helix_" + divergence_slug(div), helix);

  dot::RateRunConfig brc = cube_rate_config(rj, cfg, args, div);
  brc.seed = crc.seed;
  const dot::RateReport cube = dot::sample_complexity_run(brc);
  write_rate_outputs(args, "rate_cube_" + divergence_slug(div), cube);

  const json summary{{"divergence", div.name()},
                     {"helix_slope", helix.slope},
                     {"cube_slope", cube.slope},
                     {"helix_minus_cube", helix.slope - cube.slope},
                     {"helix_steeper_by_005", helix.slope <= cube.slope - 0.05}};
  dot::write_json_file((fs::path(args.out_dir) / "intrinsic_summary.json").string(), summary);
  write_run_meta(args, "intrinsic-demo");
  std::cout << "helix slope " << helix.slope << " cube slope " << cube.slope << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"divergence-regularized optimal transport benchmarks"};
  app.require_subcommand(1);

  CommonArgs args;
  if (const char* env_jobs = std::getenv("DOTBENCH_JOBS"))
    args.jobs = static_cast<std::size_t>(std::max(1L, std::atol(env_jobs)));

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", args.config_path, "JSON config file");
    sub->add_option("--out", args.out_dir, "output directory");
    sub->add_option_function<std::uint64_t>(
        "--seed", [&args](const std::uint64_t& s) { args.seed = s; }, "seed override");
    sub->add_option_function<double>(
        "--tol", [&args](const double& t) { args.tol = t; }, "solver tolerance override");
    sub->add_option_function<std::size_t>(
        "--max-iters", [&args](const std::size_t& m) { args.max_iters = m; },
        "solver iteration limit override");
    sub->add_option("--jobs", args.jobs, "worker threads (env DOTBENCH_JOBS)");
  };

  add_common(app.add_subcommand("solve", "solve one DOT problem"));
  add_common(app.add_subcommand("figure", "support-structure figure reproduction"));
  add_common(app.add_subcommand("stability", "optimizer stability experiment"));
  add_common(app.add_subcommand("strong-convexity", "strong-convexity certification"));
  add_common(app.add_subcommand("complexity", "sample-complexity rate experiment"));
  add_common(app.add_subcommand("intrinsic-demo", "intrinsic-dimension rate comparison"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand("solve")) return cmd_solve(args);
    if (app.got_subcommand("figure")) return cmd_figure(args);
    if (app.got_subcommand("stability")) return cmd_stability(args);
    if (app.got_subcommand("strong-convexity")) return cmd_strong_convexity(args);
    if (app.got_subcommand("complexity")) return cmd_complexity(args);
    if (app.got_subcommand("intrinsic-demo")) return cmd_intrinsic_demo(args);
  } catch (const dot::config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const dot::convergence_error& e) {
    std::cerr << "solver did not converge: " << e.what() << "\n";
    return 3;
  } catch (const dot::capacity_error& e) {
    std::cerr << "capacity exceeded: " << e.what() << "\n";
    return 4;
  } catch (const dot::certification_error& e) {
    std::cerr << "certification failed: " << e.what() << "\n";
    return 5;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
