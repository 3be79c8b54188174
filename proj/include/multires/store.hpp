// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "multires/config.hpp"
#include "multires/measurement.hpp"
#include "multires/partition.hpp"

namespace multires {

// On-disk layout: <dir>/manifest.json plus one raw little-endian float64
// file per named array. The manifest holds the config echo, the RNG
// algorithm name, measurement boxes, reduced-space metadata, and the array
// index; no timestamps, so a rerun with the same inputs is byte-identical.
class StoreWriter {
 public:
  explicit StoreWriter(const std::filesystem::path& dir);

  void put_array(const std::string& name, const Eigen::VectorXd& v);
  /// Row-major on disk; rows/cols recorded in the manifest.
  void put_matrix(const std::string& name, const Eigen::MatrixXd& m);

  nlohmann::json& meta() { return manifest_; }

  /// Writes manifest.json. Must be the last call.
  void finish();

 private:
  std::filesystem::path dir_;
  nlohmann::json manifest_;
  bool finished_ = false;
};

class StoreReader {
 public:
  explicit StoreReader(const std::filesystem::path& dir);

  const std::filesystem::path& dir() const { return dir_; }
  const nlohmann::json& manifest() const { return manifest_; }
  bool has_array(const std::string& name) const;
  Eigen::VectorXd get_array(const std::string& name) const;
  Eigen::MatrixXd get_matrix(const std::string& name) const;

 private:
  std::filesystem::path dir_;
  nlohmann::json manifest_;
};

// Everything cmd_offline produces, in memory.
struct OfflineArtifacts {
  ExperimentConfig config;
  std::vector<MeasurementBox> boxes;
  std::vector<ParameterPoint> y_train;
  std::vector<ParameterPoint> y_test;
  std::vector<FemVector> u_train;
  std::vector<FemVector> u_test;
  AffineReducedSpace global;
  AdmissibleFamily family;
};

void save_offline(const std::filesystem::path& dir,
                  const OfflineArtifacts& art);

OfflineArtifacts load_offline(const std::filesystem::path& dir);

/// Standalone raw little-endian float64 files (the estimate command's
/// output format; also what the store uses internally per array).
void write_raw_f64(const std::filesystem::path& path, const Eigen::VectorXd& v);
Eigen::VectorXd read_raw_f64(const std::filesystem::path& path);

}  // namespace multires
