// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace multires {

// Run configuration. Defaults match the full-scale benchmark; desk-scale
// runs override through a config file or CLI flags.
struct ExperimentConfig {
  double c_rule = 0.9;                          // 0.9 or 0.99
  int fine_level = 7;                           // reconstruction mesh level
  std::vector<int> coarse_levels = {2, 3, 4, 5, 6};
  int m = 8;                                    // number of measurements
  double meas_width = 0.015625;                 // box width 2^-6
  int n_train = 1000;
  int n_test = 100;
  std::uint64_t seed = 42;
  int n_splits = 7;
  int rb_max_dim = -1;      // -1 means m - 1
  double solver_tol = 1e-10;
  double sigma_target = 0;  // <= 0 disables the early-stop rule
  std::string output_dir = "out";

  int resolved_rb_max_dim() const { return rb_max_dim < 0 ? m - 1 : rb_max_dim; }

  /// Throws ConfigError when any field is out of contract.
  void validate() const;
};

/// Parse a flat `key = value` file. Values are JSON (numbers, strings,
/// arrays); bare words are accepted as strings. Blank lines and lines
/// starting with '#' are skipped. Unknown keys throw ConfigError.
ExperimentConfig parse_config_file(const std::filesystem::path& path);

/// Apply one `key`/`value` pair (same value syntax as the file) on top of
/// an existing config. Unknown keys throw ConfigError.
void apply_override(ExperimentConfig& cfg, const std::string& key,
                    const std::string& value);

/// Config as JSON for the store manifest (includes the fixed d = 16).
nlohmann::json config_to_json(const ExperimentConfig& cfg);

/// Inverse of config_to_json, used when opening a store.
ExperimentConfig config_from_json(const nlohmann::json& j);

}  // namespace multires
