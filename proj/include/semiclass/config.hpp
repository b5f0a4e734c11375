#pragma once

// JSON experiment configuration. Keys absent from the file keep the defaults of
// the named experiment; unknown keys are rejected.

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <string>

#include <json.hpp>

#include "semiclass/experiments.hpp"

namespace semiclass {

/// Malformed or inconsistent configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace config_detail {

using nlohmann::json;

inline void only_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

inline double number(const json& j, const std::string& where) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "infinity") return kInf;
  }
  throw ConfigError(where + ": expected a number");
}

inline int integer(const json& j, const std::string& where) {
  if (!j.is_number_integer()) throw ConfigError(where + ": expected an integer");
  return j.get<int>();
}

inline Eigen::VectorXd vector(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + ": expected an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[i] = number(j[i], where);
  return v;
}

inline PotentialSpec parse_potential(const json& j) {
  if (j.is_string()) return parse_potential(json{{"type", j}});
  only_keys(j, {"type", "H", "x0", "coefficients"}, "potential");
  if (!j.contains("type") || !j["type"].is_string()) throw ConfigError("potential: missing 'type'");
  const auto type = j["type"].get<std::string>();
  const auto no_params = [&] {
    if (j.size() != 1) throw ConfigError("potential '" + type + "' takes no parameters");
  };
  if (type == "harmonic") return no_params(), potential::Harmonic{};
  if (type == "quartic") return no_params(), potential::Quartic{};
  if (type == "double_well") return no_params(), potential::DoubleWell{};
  if (type == "polynomial") {
    if (!j.contains("coefficients")) throw ConfigError("polynomial potential needs 'coefficients'");
    const auto c = vector(j["coefficients"], "potential.coefficients");
    return potential::Polynomial{std::vector<double>(c.begin(), c.end())};
  }
  if (type == "quadratic") {
    if (!j.contains("H") || !j["H"].is_array()) throw ConfigError("quadratic potential needs 'H'");
    const auto& Hj = j["H"];
    const auto d = static_cast<Eigen::Index>(Hj.size());
    potential::Quadratic q{Eigen::MatrixXd(d, d), Eigen::VectorXd::Zero(d)};
    for (Eigen::Index r = 0; r < d; ++r) {
      const auto row = vector(Hj[r], "potential.H");
      if (row.size() != d) throw ConfigError("potential.H must be square");
      q.H.row(r) = row.transpose();
    }
    if (j.contains("x0")) q.x0 = vector(j["x0"], "potential.x0");
    return q;
  }
  throw ConfigError("unknown potential type '" + type + "'");
}

}  // namespace config_detail

/// Range checks shared by file and command-line input.
inline void validate_config(const ExperimentConfig& c) {
  if (c.d < 1 || c.d > 3) throw ConfigError("d must be 1, 2 or 3");
  if (!(c.E > 0.0) || !std::isfinite(c.E)) throw ConfigError("E must be finite and > 0");
  if (!(c.eps > 0.0) || !std::isfinite(c.eps)) throw ConfigError("eps must be finite and > 0");
  const auto& s = c.h_sweep;
  if (!(s.h_min > 0.0) || !(s.h_max > s.h_min) || !(s.h_max < 1.0) || s.count < 4)
    throw ConfigError("h_sweep needs 0 < h_min < h_max < 1 and count >= 4");
  for (int n : c.levels)
    if (n < 0 || n > kMaxHermiteDegree) throw ConfigError("levels must lie in [0, 1e6]");
  for (double q : c.q)
    if (!(q >= 1.0)) throw ConfigError("q values must be >= 1");
  if (!(c.grid.dx_over_h > 0.0) || !(c.grid.dx_over_sqrt_h > 0.0) || c.grid.max_points_1d < 9 ||
      c.grid.max_points_2d_axis < 9)
    throw ConfigError("grid policy values must be positive (at least 9 points per axis)");
  try {
    validate(c.potential, std::min(c.d, 2));
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
}

/// Defaults of `j["experiment"]` (or `experiment` when given) overridden by the file.
inline ExperimentConfig parse_config(const nlohmann::json& j, std::string experiment = {}) {
  using namespace config_detail;
  only_keys(j, {"experiment", "potential", "d", "E", "eps", "h_sweep", "levels", "q", "grid", "out", "seed"},
            "config");
  if (j.contains("experiment")) {
    if (!j["experiment"].is_string()) throw ConfigError("config.experiment: expected a string");
    const auto named = j["experiment"].get<std::string>();
    if (!experiment.empty() && named != experiment)
      throw ConfigError("config is for experiment '" + named + "', not '" + experiment + "'");
    experiment = named;
  }
  if (experiment.empty()) throw ConfigError("no experiment named");
  if (!find_experiment(experiment)) throw ConfigError("unknown experiment '" + experiment + "'");

  ExperimentConfig c = default_config(experiment);
  if (j.contains("potential")) c.potential = parse_potential(j["potential"]);
  if (j.contains("d")) c.d = integer(j["d"], "d");
  if (j.contains("E")) c.E = number(j["E"], "E");
  if (j.contains("eps")) c.eps = number(j["eps"], "eps");
  if (j.contains("h_sweep")) {
    const auto& s = j["h_sweep"];
    only_keys(s, {"h_max", "h_min", "count"}, "h_sweep");
    if (s.contains("h_max")) c.h_sweep.h_max = number(s["h_max"], "h_sweep.h_max");
    if (s.contains("h_min")) c.h_sweep.h_min = number(s["h_min"], "h_sweep.h_min");
    if (s.contains("count")) c.h_sweep.count = integer(s["count"], "h_sweep.count");
  }
  if (j.contains("levels")) {
    if (!j["levels"].is_array()) throw ConfigError("levels: expected an array");
    c.levels.clear();
    for (const auto& v : j["levels"]) c.levels.push_back(integer(v, "levels"));
  }
  if (j.contains("q")) {
    const auto q = vector(j["q"], "q");
    c.q.assign(q.begin(), q.end());
  }
  if (j.contains("grid")) {
    const auto& g = j["grid"];
    only_keys(g, {"dx_over_h", "dx_over_sqrt_h", "max_points_1d", "max_points_2d_axis"}, "grid");
    if (g.contains("dx_over_h")) c.grid.dx_over_h = number(g["dx_over_h"], "grid.dx_over_h");
    if (g.contains("dx_over_sqrt_h")) c.grid.dx_over_sqrt_h = number(g["dx_over_sqrt_h"], "grid.dx_over_sqrt_h");
    if (g.contains("max_points_1d")) c.grid.max_points_1d = integer(g["max_points_1d"], "grid.max_points_1d");
    if (g.contains("max_points_2d_axis"))
      c.grid.max_points_2d_axis = integer(g["max_points_2d_axis"], "grid.max_points_2d_axis");
  }
  if (j.contains("out")) {
    if (!j["out"].is_string()) throw ConfigError("out: expected a string");
    c.out = j["out"].get<std::string>();
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_integer() || j["seed"].get<std::int64_t>() < 0) throw ConfigError("seed: expected a non-negative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  validate_config(c);
  return c;
}

inline nlohmann::json potential_to_json(const PotentialSpec& v) {
  nlohmann::json j{{"type", potential_name(v)}};
  if (const auto* q = std::get_if<potential::Quadratic>(&v)) {
    j["H"] = nlohmann::json::array();
    for (Eigen::Index r = 0; r < q->H.rows(); ++r) {
      std::vector<double> row(q->H.cols());
      for (Eigen::Index c = 0; c < q->H.cols(); ++c) row[c] = q->H(r, c);
      j["H"].push_back(row);
    }
    j["x0"] = std::vector<double>(q->x0.begin(), q->x0.end());
  }
  if (const auto* p = std::get_if<potential::Polynomial>(&v)) j["coefficients"] = p->coefficients;
  return j;
}

/// Inverse of parse_config; q = inf is written as "inf".
inline nlohmann::json config_to_json(const ExperimentConfig& c) {
  nlohmann::json q = nlohmann::json::array();
  for (double v : c.q) std::isinf(v) ? q.push_back("inf") : q.push_back(v);
  return {{"experiment", c.experiment},
          {"potential", potential_to_json(c.potential)},
          {"d", c.d},
          {"E", c.E},
          {"eps", c.eps},
          {"h_sweep", {{"h_max", c.h_sweep.h_max}, {"h_min", c.h_sweep.h_min}, {"count", c.h_sweep.count}}},
          {"levels", c.levels},
          {"q", q},
          {"grid",
           {{"dx_over_h", c.grid.dx_over_h},
            {"dx_over_sqrt_h", c.grid.dx_over_sqrt_h},
            {"max_points_1d", c.grid.max_points_1d},
            {"max_points_2d_axis", c.grid.max_points_2d_axis}}},
          {"out", c.out},
          {"seed", c.seed}};
}

inline ExperimentConfig load_config(const std::string& path, std::string experiment = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  return parse_config(j, std::move(experiment));
}

}  // namespace semiclass
