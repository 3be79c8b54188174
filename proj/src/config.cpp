// SPDX-License-Identifier: Apache-2.0
#include "multires/config.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "multires/errors.hpp"

namespace multires {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

nlohmann::json parse_value(const std::string& text) {
  std::string t = trim(text);
  if (t.empty()) throw ConfigError("empty config value");
  nlohmann::json j = nlohmann::json::parse(t, nullptr, false);
  if (!j.is_discarded()) return j;
  return nlohmann::json(t);  // bare word, keep as string
}

int as_int(const nlohmann::json& v, const std::string& key) {
  if (!v.is_number_integer())
    throw ConfigError("config key '" + key + "' expects an integer");
  return v.get<int>();
}

double as_double(const nlohmann::json& v, const std::string& key) {
  if (!v.is_number())
    throw ConfigError("config key '" + key + "' expects a number");
  return v.get<double>();
}

void set_key(ExperimentConfig& cfg, const std::string& key,
             const nlohmann::json& v) {
  if (key == "c_rule") {
    cfg.c_rule = as_double(v, key);
  } else if (key == "fine_level") {
    cfg.fine_level = as_int(v, key);
  } else if (key == "coarse_levels") {
    if (!v.is_array())
      throw ConfigError("config key 'coarse_levels' expects an array");
    cfg.coarse_levels.clear();
    for (const auto& e : v) cfg.coarse_levels.push_back(as_int(e, key));
  } else if (key == "m") {
    cfg.m = as_int(v, key);
  } else if (key == "meas_width") {
    cfg.meas_width = as_double(v, key);
  } else if (key == "n_train") {
    cfg.n_train = as_int(v, key);
  } else if (key == "n_test") {
    cfg.n_test = as_int(v, key);
  } else if (key == "seed") {
    if (!v.is_number_unsigned() && !v.is_number_integer())
      throw ConfigError("config key 'seed' expects an integer");
    cfg.seed = v.get<std::uint64_t>();
  } else if (key == "n_splits") {
    cfg.n_splits = as_int(v, key);
  } else if (key == "rb_max_dim") {
    cfg.rb_max_dim = as_int(v, key);
  } else if (key == "solver_tol") {
    cfg.solver_tol = as_double(v, key);
  } else if (key == "sigma_target") {
    cfg.sigma_target = as_double(v, key);
  } else if (key == "output_dir") {
    if (!v.is_string())
      throw ConfigError("config key 'output_dir' expects a string");
    cfg.output_dir = v.get<std::string>();
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  if (c_rule != 0.9 && c_rule != 0.99)
    throw ConfigError("c_rule must be 0.9 or 0.99");
  if (fine_level < 2 || fine_level > 14)
    throw ConfigError("fine_level must be in [2, 14]");
  if (coarse_levels.empty()) throw ConfigError("coarse_levels must be nonempty");
  for (int s : coarse_levels)
    if (s < 2 || s >= fine_level)
      throw ConfigError("coarse levels must satisfy 2 <= s < fine_level");
  if (m < 1) throw ConfigError("m must be positive");
  if (!(meas_width > 0 && meas_width < 1))
    throw ConfigError("meas_width must lie in (0, 1)");
  if (n_train < 1) throw ConfigError("n_train must be positive");
  if (n_test < 1) throw ConfigError("n_test must be positive");
  if (n_splits < 0) throw ConfigError("n_splits must be non-negative");
  int rb = resolved_rb_max_dim();
  if (rb < 0 || rb >= m)
    throw ConfigError("rb_max_dim must satisfy 0 <= rb_max_dim < m");
  if (!(solver_tol > 0)) throw ConfigError("solver_tol must be positive");
  if (output_dir.empty()) throw ConfigError("output_dir must be nonempty");
}

ExperimentConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  ExperimentConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) +
                        " is not 'key = value'");
    apply_override(cfg, trim(t.substr(0, eq)), t.substr(eq + 1));
  }
  return cfg;
}

void apply_override(ExperimentConfig& cfg, const std::string& key,
                    const std::string& value) {
  set_key(cfg, key, parse_value(value));
}

nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["d"] = 16;
  j["c_rule"] = cfg.c_rule;
  j["fine_level"] = cfg.fine_level;
  j["coarse_levels"] = cfg.coarse_levels;
  j["m"] = cfg.m;
  j["meas_width"] = cfg.meas_width;
  j["n_train"] = cfg.n_train;
  j["n_test"] = cfg.n_test;
  j["seed"] = cfg.seed;
  j["n_splits"] = cfg.n_splits;
  j["rb_max_dim"] = cfg.resolved_rb_max_dim();
  j["solver_tol"] = cfg.solver_tol;
  j["sigma_target"] = cfg.sigma_target;
  j["output_dir"] = cfg.output_dir;
  return j;
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() == "d") {
      if (it.value().get<int>() != 16)
        throw ConfigError("store manifest has unsupported parameter dimension");
      continue;
    }
    set_key(cfg, it.key(), it.value());
  }
  return cfg;
}

}  // namespace multires
