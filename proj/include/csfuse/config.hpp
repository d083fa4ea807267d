#pragma once

// JSON experiment configuration. Field names mirror ExperimentConfig; unknown
// keys are rejected so typos do not silently fall back to defaults.

#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "csfuse/error.hpp"
#include "csfuse/harness.hpp"

namespace csfuse {

using Json = nlohmann::json;

namespace detail {

inline void check_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigurationError(where + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) throw ConfigurationError(where + ": unknown key '" + it.key() + "'");
  }
}

template <class T>
void read_opt(const Json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigurationError(where + "." + key + ": " + e.what());
  }
}

// Either a rate or its inverse.
inline void read_rate(const Json& j, const char* rate, const char* inv, double& out, const std::string& where) {
  if (j.contains(rate) && j.contains(inv))
    throw ConfigurationError(where + ": give only one of " + rate + " and " + inv);
  read_opt(j, rate, out, where);
  if (j.contains(inv)) {
    double v = 0.0;
    read_opt(j, inv, v, where);
    if (!(v > 0.0)) throw ConfigurationError(where + "." + inv + " must be > 0");
    out = 1.0 / v;
  }
}

}  // namespace detail

inline ScenarioSpec parse_scenario(const Json& j) {
  detail::check_keys(j, {"id", "n", "seed", "params"}, "scenario");
  ScenarioSpec s;
  std::string id = to_string(s.id);
  detail::read_opt(j, "id", id, "scenario");
  s.id = parse_scenario_id(id);
  detail::read_opt(j, "n", s.n, "scenario");
  detail::read_opt(j, "seed", s.seed, "scenario");
  if (j.contains("params")) {
    const Json& p = j.at("params");
    detail::check_keys(p,
                       {"sigma0_sq", "lambda0", "inv_lambda0", "a0", "lambda1", "inv_lambda1", "a1", "sigma_v_sq",
                        "sigma_s_sq"},
                       "scenario.params");
    detail::read_opt(p, "sigma0_sq", s.params.sigma0_sq, "scenario.params");
    detail::read_rate(p, "lambda0", "inv_lambda0", s.params.lambda0, "scenario.params");
    detail::read_opt(p, "a0", s.params.a0, "scenario.params");
    detail::read_rate(p, "lambda1", "inv_lambda1", s.params.lambda1, "scenario.params");
    detail::read_opt(p, "a1", s.params.a1, "scenario.params");
    detail::read_opt(p, "sigma_v_sq", s.params.sigma_v_sq, "scenario.params");
    detail::read_opt(p, "sigma_s_sq", s.params.sigma_s_sq, "scenario.params");
  }
  s.validate();
  return s;
}

inline DetectorConfig parse_detector_config(const Json& j, const std::string& where) {
  detail::check_keys(j, {"name", "c_r", "T", "ls_mode", "tie", "sensor_pairs", "copula_fit_samples"}, where);
  if (!j.contains("name")) throw ConfigurationError(where + ": missing 'name'");
  DetectorConfig d;
  d.kind = parse_detector(j.at("name").get<std::string>());
  if (!is_compressed(d.kind)) d.c_r = {1.0};
  detail::read_opt(j, "c_r", d.c_r, where);
  if (j.contains("T")) {
    Index t = 1;
    detail::read_opt(j, "T", t, where);
    d.t = t;
  }
  if (j.contains("ls_mode")) d.ls_mode = parse_ls_mode(j.at("ls_mode").get<std::string>());
  if (j.contains("tie")) d.tie = parse_tie_mode(j.at("tie").get<std::string>());
  if (j.contains("sensor_pairs")) {
    std::vector<std::vector<Index>> sp;
    detail::read_opt(j, "sensor_pairs", sp, where);
    for (const auto& p : sp) {
      if (p.size() != 2) throw ConfigurationError(where + ".sensor_pairs: each entry must be [j, k]");
      d.sensor_pairs.emplace_back(p[0], p[1]);
    }
  }
  detail::read_opt(j, "copula_fit_samples", d.copula_fit_samples, where);
  if (d.copula_fit_samples < 10) throw ConfigurationError(where + ".copula_fit_samples must be >= 10");
  return d;
}

inline ExperimentConfig parse_config(const Json& j) {
  detail::check_keys(j,
                     {"scenario", "detectors", "trials", "seed", "threads", "fixed_projection", "roc_levels", "T",
                      "alpha", "output_dir", "calibrate", "bounds", "bench"},
                     "config");
  ExperimentConfig c;
  if (j.contains("scenario")) c.scenario = parse_scenario(j.at("scenario"));
  if (j.contains("detectors")) {
    const Json& ds = j.at("detectors");
    if (!ds.is_array()) throw ConfigurationError("config.detectors: expected an array");
    for (std::size_t k = 0; k < ds.size(); ++k)
      c.detectors.push_back(parse_detector_config(ds[k], "config.detectors[" + std::to_string(k) + "]"));
  }
  detail::read_opt(j, "trials", c.trials, "config");
  detail::read_opt(j, "seed", c.seed, "config");
  detail::read_opt(j, "threads", c.threads, "config");
  detail::read_opt(j, "fixed_projection", c.fixed_projection, "config");
  detail::read_opt(j, "roc_levels", c.roc_levels, "config");
  detail::read_opt(j, "T", c.t, "config");
  detail::read_opt(j, "alpha", c.alpha, "config");
  detail::read_opt(j, "output_dir", c.output_dir, "config");
  if (j.contains("calibrate")) {
    const Json& k = j.at("calibrate");
    detail::check_keys(k, {"detector", "alpha0", "trials", "a0_grid", "inv_lambda0_grid"}, "config.calibrate");
    if (k.contains("detector")) c.calibrate.detector = parse_detector_config(k.at("detector"), "config.calibrate.detector");
    detail::read_opt(k, "alpha0", c.calibrate.alpha0, "config.calibrate");
    detail::read_opt(k, "trials", c.calibrate.trials, "config.calibrate");
    detail::read_opt(k, "a0_grid", c.calibrate.a0_grid, "config.calibrate");
    detail::read_opt(k, "inv_lambda0_grid", c.calibrate.inv_lambda0_grid, "config.calibrate");
  }
  if (j.contains("bounds")) {
    const Json& b = j.at("bounds");
    detail::check_keys(b, {"c_r", "trials", "projection_seeds", "epsilon_b", "approaches"}, "config.bounds");
    detail::read_opt(b, "c_r", c.bounds.c_r, "config.bounds");
    detail::read_opt(b, "trials", c.bounds.trials, "config.bounds");
    detail::read_opt(b, "projection_seeds", c.bounds.projection_seeds, "config.bounds");
    detail::read_opt(b, "epsilon_b", c.bounds.epsilon_b, "config.bounds");
    detail::read_opt(b, "approaches", c.bounds.approaches, "config.bounds");
  }
  if (j.contains("bench")) {
    const Json& b = j.at("bench");
    detail::check_keys(b, {"approaches", "c_r", "evals", "warmup"}, "config.bench");
    detail::read_opt(b, "approaches", c.bench.approaches, "config.bench");
    detail::read_opt(b, "c_r", c.bench.c_r, "config.bench");
    detail::read_opt(b, "evals", c.bench.evals, "config.bench");
    detail::read_opt(b, "warmup", c.bench.warmup, "config.bench");
  }
  return c;
}

inline ExperimentConfig parse_config_text(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigurationError(std::string("config: ") + e.what());
  }
  return parse_config(j);
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

}  // namespace csfuse
