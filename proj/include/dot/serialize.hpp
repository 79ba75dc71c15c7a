#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dot/complexity.hpp"
#include "dot/coupling.hpp"
#include "dot/dot_solver.hpp"
#include "dot/error.hpp"
#include "dot/measure.hpp"
#include "dot/stability.hpp"
#include "json.hpp"

namespace dot {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// measures

inline json to_json(const DiscreteMeasure& m) {
  json points = json::array();
  for (std::size_t i = 0; i < m.size(); ++i) {
    json p = json::array();
    for (double c : m.point(i)) p.push_back(c);
    points.push_back(std::move(p));
  }
  return json{{"points", std::move(points)}, {"weights", m.weights()}};
}

inline DiscreteMeasure measure_from_json(const json& j) {
  if (!j.is_object() || !j.contains("points") || !j.contains("weights"))
    throw config_error("measure JSON requires {\"points\": [[..]], \"weights\": [..]}");
  std::vector<std::vector<double>> pts;
  for (const auto& p : j.at("points")) pts.push_back(p.get<std::vector<double>>());
  return DiscreteMeasure(std::move(pts), j.at("weights").get<std::vector<double>>());
}

// ---------------------------------------------------------------------------
// solutions and reports

inline json to_json(const Solution& sol) {
  json potentials = json::array();
  for (const auto& h : sol.potentials.h) potentials.push_back(h);
  return json{{"primal_value", sol.primal_value},
              {"dual_value", sol.dual_value},
              {"gap", sol.gap},
              {"iterations", sol.iterations},
              {"max_residual", sol.max_residual},
              {"feasibility_residual", sol.coupling.feasibility_residual()},
              {"support_count", support_count(sol.coupling, 0.0)},
              {"potentials", std::move(potentials)},
              {"normalization_offsets", sol.potentials.normalization_offsets},
              {"coupling", {{"dims", sol.coupling.shape().dims()},
                            {"mass", sol.coupling.mass()},
                            {"density", sol.coupling.density()}}}};
}

inline json to_json(const StabilityReport& rep) {
  json rows = json::array();
  for (const auto& r : rep.rows)
    rows.push_back(json{{"delta_target", r.delta_target},
                        {"delta", r.delta},
                        {"wq", r.wq},
                        {"ratio", r.ratio},
                        {"value", r.value},
                        {"value_tilde", r.value_tilde},
                        {"lipschitz", r.lipschitz}});
  return json{{"q", rep.q}, {"lipschitz", rep.lipschitz}, {"slope", rep.slope},
              {"rows", std::move(rows)}};
}

inline json to_json(const RateReport& rep) {
  return json{{"n_values", rep.n_values},
              {"mean_abs_errors", rep.mean_abs_errors},
              {"replications", rep.replications},
              {"slope", rep.slope},
              {"slope_ci", {rep.slope_lo, rep.slope_hi}},
              {"excluded_smallest_n", rep.excluded_smallest_n},
              {"reference_value", rep.reference_value},
              {"reference_bias", rep.reference_bias},
              {"bias_ok", rep.bias_ok},
              {"failures", rep.failures},
              {"errors", rep.errors}};
}

// ---------------------------------------------------------------------------
// CSV

inline std::string csv_escape(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

inline std::string coupling_csv(const Coupling& c) {
  std::ostringstream os;
  os << "flat_index";
  for (std::size_t i = 0; i < c.marginals().count(); ++i) os << ",atom_" << i + 1;
  os << ",mass,density\n";
  std::vector<std::size_t> idx;
  for (std::size_t f = 0; f < c.mass().size(); ++f) {
    c.shape().unflatten(f, idx);
    os << f;
    for (std::size_t i : idx) os << ',' << i;
    os << ',' << csv_escape(c.mass()[f]) << ',' << csv_escape(c.density()[f]) << '\n';
  }
  return os.str();
}

inline std::string stability_csv(const StabilityReport& rep) {
  std::ostringstream os;
  os << "delta_target,delta,wq,ratio,value,value_tilde\n";
  for (const auto& r : rep.rows)
    os << csv_escape(r.delta_target) << ',' << csv_escape(r.delta) << ',' << csv_escape(r.wq)
       << ',' << csv_escape(r.ratio) << ',' << csv_escape(r.value) << ','
       << csv_escape(r.value_tilde) << '\n';
  return os.str();
}

inline std::string rate_csv(const RateReport& rep) {
  std::ostringstream os;
  os << "n,mean_abs_error,replications\n";
  for (std::size_t i = 0; i < rep.n_values.size(); ++i)
    os << rep.n_values[i] << ',' << csv_escape(rep.mean_abs_errors[i]) << ','
       << rep.errors[i].size() << '\n';
  return os.str();
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw config_error("cannot write file: " + path);
  out << content;
}

inline void write_json_file(const std::string& path, const json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

}  // namespace dot
