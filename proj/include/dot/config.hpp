#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dot/complexity.hpp"
#include "dot/dot_solver.hpp"
#include "dot/error.hpp"
#include "dot/measure.hpp"
#include "dot/serialize.hpp"
#include "dot/stability.hpp"

namespace dot {

// Every numeric default in one place; bump the version when any of them
// changes, so runs are comparable.
struct Defaults {
  static constexpr const char* version = "1";

  static constexpr double solver_tol = 1e-9;
  static constexpr double solver_root_tol = 1e-12;
  static constexpr std::size_t solver_max_iters = 10000;
  static constexpr std::size_t capacity = 1000000;
  static constexpr std::size_t wasserstein_max_side = 500;

  // figure reproduction (caption's eps = 100 read as the cost multiplier)
  static constexpr double figure_epsilon = 0.01;
  static constexpr std::size_t figure_atoms = 10;

  // stability experiment
  static constexpr double stability_epsilon = 0.05;
  static constexpr double stability_q = 2.0;
  static constexpr int stability_level_min_k = 3;
  static constexpr int stability_level_max_k = 8;

  // strong convexity certification
  static constexpr std::size_t strong_convexity_pairs = 200;

  // sample-complexity harness (the tilt balances the linear CLT term of the
  // plug-in error against the divergence-dependent higher-order terms; see
  // the rate experiment configs)
  static constexpr std::size_t rate_grid_per_axis = 10;   // d = 3 cube reference
  static constexpr std::size_t rate_curve_points = 1000;  // curve reference
  static constexpr double rate_tilt_offset = 0.3;         // second marginal weight tilt
  static constexpr double rate_epsilon = 0.05;
  static constexpr std::size_t rate_replications = 150;
  static constexpr std::uint64_t default_seed = 1;
};

inline SolverOptions solver_options_from_json(const json& j) {
  SolverOptions o;
  o.tol = Defaults::solver_tol;
  o.root_tol = Defaults::solver_root_tol;
  o.max_iters = Defaults::solver_max_iters;
  if (j.is_null()) return o;
  if (j.contains("tol")) o.tol = j.at("tol").get<double>();
  if (j.contains("root_tol")) o.root_tol = j.at("root_tol").get<double>();
  if (j.contains("max_iters")) o.max_iters = j.at("max_iters").get<std::size_t>();
  if (j.contains("sweep")) {
    const std::string s = j.at("sweep").get<std::string>();
    if (s == "gauss-seidel")
      o.sweep = SweepMode::GaussSeidel;
    else if (s == "jacobi")
      o.sweep = SweepMode::Jacobi;
    else
      throw config_error("solver.sweep must be \"gauss-seidel\" or \"jacobi\"");
  }
  return o;
}

inline DiscreteMeasure marginal_from_json(const json& j) {
  if (j.is_object() && j.contains("points")) return measure_from_json(j);
  if (j.is_object() && j.contains("uniform_line"))
    return DiscreteMeasure::uniform_line(j.at("uniform_line").get<std::size_t>());
  if (j.is_object() && j.contains("uniform_grid")) {
    const auto& g = j.at("uniform_grid");
    return DiscreteMeasure::uniform_grid(g.at("d").get<std::size_t>(),
                                         g.at("per_axis").get<std::size_t>());
  }
  if (j.is_object() && j.contains("curve_grid")) {
    const auto& g = j.at("curve_grid");
    const std::string kind = g.at("kind").get<std::string>();
    if (kind != "helix" && kind != "line")
      throw config_error("curve_grid.kind must be \"helix\" or \"line\"");
    return curve_grid(kind == "helix" ? CurveKind::Helix : CurveKind::Line,
                      g.at("points").get<std::size_t>());
  }
  if (j.is_object() && j.contains("weight_tilt")) {
    const auto& g = j.at("weight_tilt");
    return tilt_weights(marginal_from_json(g.at("base")),
                        g.contains("offset") ? g.at("offset").get<double>()
                                             : Defaults::rate_tilt_offset);
  }
  throw config_error("unrecognized marginal spec: " + j.dump());
}

inline DivergenceSpec divergence_from_json(const json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "entropic") return DivergenceSpec::entropic();
    throw config_error("divergence string must be \"entropic\", or use {\"alpha\": a} / "
                       "{\"poly_beta\": b}");
  }
  if (j.is_object() && j.contains("alpha")) return DivergenceSpec::alpha(j.at("alpha").get<double>());
  if (j.is_object() && j.contains("poly_beta"))
    return DivergenceSpec::poly_dual(j.at("poly_beta").get<int>());
  throw config_error("unrecognized divergence spec: " + j.dump());
}

inline ProblemSpec problem_from_json(const json& j) {
  if (!j.is_object()) throw config_error("problem must be an object");
  if (!j.contains("marginals")) throw config_error("problem.marginals is required");
  std::vector<DiscreteMeasure> ms;
  for (const auto& mj : j.at("marginals")) ms.push_back(marginal_from_json(mj));
  const double p = j.contains("metric_p") ? j.at("metric_p").get<double>() : 2.0;
  MarginalTuple tuple(std::move(ms), p);

  CostSpec cost = [&] {
    if (!j.contains("cost")) return CostSpec::sq_euclidean_sum(tuple);
    const auto& cj = j.at("cost");
    if (cj.is_string()) {
      if (cj.get<std::string>() == "sq_euclidean_sum") return CostSpec::sq_euclidean_sum(tuple);
      throw config_error("cost string must be \"sq_euclidean_sum\"");
    }
    if (cj.is_object() && cj.contains("power"))
      return CostSpec::power_distance(tuple, cj.at("power").get<double>());
    if (cj.is_object() && cj.contains("tensor")) {
      if (!cj.contains("lipschitz"))
        throw config_error("explicit cost tensor requires a \"lipschitz\" field");
      return CostSpec::explicit_tensor(tuple, cj.at("tensor").get<std::vector<double>>(),
                                       cj.at("lipschitz").get<double>());
    }
    throw config_error("unrecognized cost spec: " + cj.dump());
  }();

  ProblemSpec prob{std::move(tuple), std::move(cost),
                   j.contains("divergence") ? divergence_from_json(j.at("divergence"))
                                            : DivergenceSpec::entropic(),
                   j.contains("epsilon") ? j.at("epsilon").get<double>() : 1.0,
                   j.contains("capacity") ? j.at("capacity").get<std::size_t>()
                                          : Defaults::capacity};
  prob.validate();
  return prob;
}

}  // namespace dot
