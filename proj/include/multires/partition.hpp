// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "multires/problem.hpp"
#include "multires/reduced_basis.hpp"

namespace multires {

// One box of the parameter-domain partition with the reduced space built
// from the training snapshots whose parameters fall inside. Membership is
// left-closed/right-open, closed on the upper side where the cell touches
// the global boundary.
struct ParameterCell {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  std::vector<int> members;
  AffineReducedSpace space;
  bool frozen = false;  // no valid split direction; skipped by further splits

  bool contains(const ParameterPoint& y, const ParameterBox& root) const;
};

struct SplitRecord {
  int cell_index = -1;
  int direction = -1;
  double sigma_before = 0.0;
  double sigma_minus = 0.0;
  double sigma_plus = 0.0;
};

struct AdmissibleFamily {
  ParameterBox root;
  std::vector<ParameterCell> cells;
  std::vector<SplitRecord> history;

  int size() const { return static_cast<int>(cells.size()); }

  /// Index of the unique cell containing y. Total on the root box.
  int locate(const ParameterPoint& y) const;

  double max_sigma() const;
};

struct PartitionOptions {
  int n_splits = 0;
  double sigma_target = 0.0;  // <= 0 disables the target-based stop
  GreedyOptions greedy;
  int threads = 1;
};

/// Starts from the root cell holding every training snapshot and repeatedly
/// splits the cell with the largest sigma_est = mu * eps_est, halving it in
/// the direction that minimizes the worse child's sigma_est.
AdmissibleFamily build_family(const std::vector<FemVector>& snapshots,
                              const std::vector<ParameterPoint>& params,
                              const MeasurementSpace& ms, const H1Gram& gram,
                              const ParameterBox& root,
                              const PartitionOptions& options);

/// One greedy split. Returns false when no cell can be split (all frozen,
/// too few members, or zero sigma everywhere).
bool split_step(AdmissibleFamily& family,
                const std::vector<FemVector>& snapshots,
                const std::vector<ParameterPoint>& params,
                const MeasurementSpace& ms, const H1Gram& gram,
                const PartitionOptions& options,
                const Eigen::VectorXd* pool_norms2 = nullptr);

}  // namespace multires
