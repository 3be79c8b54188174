// SPDX-License-Identifier: Apache-2.0
#include "multires/partition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "multires/parallel.hpp"

namespace multires {

namespace {

FemVector member_mean(const std::vector<FemVector>& snapshots,
                      const std::vector<int>& members) {
  FemVector mean = snapshots[static_cast<std::size_t>(members[0])];
  for (std::size_t i = 1; i < members.size(); ++i) {
    mean.coeffs += snapshots[static_cast<std::size_t>(members[i])].coeffs;
  }
  mean.coeffs /= static_cast<double>(members.size());
  return mean;
}

// Builds a cell's reduced space. Cells with fewer than two members get the
// zero-dimensional space around the single member (or the parent offset for
// an empty cell); sigma_est is then zero by construction.
AffineReducedSpace build_cell_space(const std::vector<FemVector>& snapshots,
                                    const std::vector<int>& members,
                                    const FemVector& parent_offset,
                                    const MeasurementSpace& ms,
                                    const H1Gram& gram,
                                    const GreedyOptions& greedy,
                                    const Eigen::VectorXd* pool_norms2) {
  AffineReducedSpace space;
  if (members.empty()) {
    space.offset = parent_offset;
    space.eps_history.push_back(0.0);
  } else {
    const FemVector offset = member_mean(snapshots, members);
    space = greedy_build(snapshots, members, offset, gram, greedy, pool_norms2);
  }
  space.mu = inf_sup(space, ms);
  const double eps = space.eps_est();
  space.sigma_est = std::isfinite(space.mu)
                        ? space.mu * eps
                        : (eps > 0.0 ? space.mu : 0.0);
  return space;
}

int worst_splittable_cell(const AdmissibleFamily& family) {
  int best = -1;
  double best_sigma = 0.0;
  for (int k = 0; k < family.size(); ++k) {
    const ParameterCell& cell = family.cells[static_cast<std::size_t>(k)];
    if (cell.frozen) continue;
    const double sigma = cell.space.sigma_est;
    if (sigma > best_sigma) {
      best_sigma = sigma;
      best = k;
    }
  }
  return best;
}

}  // namespace

bool ParameterCell::contains(const ParameterPoint& y,
                             const ParameterBox& root) const {
  if (y.size() != lower.size()) return false;
  for (int j = 0; j < y.size(); ++j) {
    if (y[j] < lower[j]) return false;
    if (y[j] > upper[j]) return false;
    if (y[j] == upper[j] && upper[j] != root.upper[j]) return false;
  }
  return true;
}

int AdmissibleFamily::locate(const ParameterPoint& y) const {
  if (!root.contains(y)) {
    throw OutOfBox("locate: parameter outside the root box");
  }
  for (int k = 0; k < size(); ++k) {
    if (cells[static_cast<std::size_t>(k)].contains(y, root)) return k;
  }
  throw Error("locate: partition failed to cover the root box");
}

double AdmissibleFamily::max_sigma() const {
  double out = 0.0;
  for (const auto& cell : cells) out = std::max(out, cell.space.sigma_est);
  return out;
}

bool split_step(AdmissibleFamily& family,
                const std::vector<FemVector>& snapshots,
                const std::vector<ParameterPoint>& params,
                const MeasurementSpace& ms, const H1Gram& gram,
                const PartitionOptions& options,
                const Eigen::VectorXd* pool_norms2) {
  const int d = family.root.dim();

  while (true) {
    const int worst = worst_splittable_cell(family);
    if (worst < 0) return false;
    ParameterCell& cell = family.cells[static_cast<std::size_t>(worst)];
    if (static_cast<int>(cell.members.size()) < 2) {
      cell.frozen = true;
      continue;
    }

    struct Trial {
      bool valid = false;
      std::vector<int> minus, plus;
      AffineReducedSpace space_minus, space_plus;
      double score = std::numeric_limits<double>::infinity();
    };
    std::vector<Trial> trials(static_cast<std::size_t>(d));

    parallel_for(d, options.threads, [&](int dir) {
      Trial& trial = trials[static_cast<std::size_t>(dir)];
      const double mid = 0.5 * (cell.lower[dir] + cell.upper[dir]);
      for (int idx : cell.members) {
        const ParameterPoint& y = params[static_cast<std::size_t>(idx)];
        (y[dir] < mid ? trial.minus : trial.plus).push_back(idx);
      }
      // A split that empties one side does not refine the family.
      if (trial.minus.empty() || trial.plus.empty()) return;
      trial.space_minus =
          build_cell_space(snapshots, trial.minus, cell.space.offset, ms, gram,
                           options.greedy, pool_norms2);
      trial.space_plus =
          build_cell_space(snapshots, trial.plus, cell.space.offset, ms, gram,
                           options.greedy, pool_norms2);
      trial.score = std::max(trial.space_minus.sigma_est,
                             trial.space_plus.sigma_est);
      trial.valid = true;
    });

    int best_dir = -1;
    for (int dir = 0; dir < d; ++dir) {
      const Trial& trial = trials[static_cast<std::size_t>(dir)];
      if (!trial.valid) continue;
      if (best_dir < 0 ||
          trial.score < trials[static_cast<std::size_t>(best_dir)].score) {
        best_dir = dir;
      }
    }
    if (best_dir < 0) {
      cell.frozen = true;  // every direction leaves one side empty
      continue;
    }

    Trial& chosen = trials[static_cast<std::size_t>(best_dir)];
    const double mid = 0.5 * (cell.lower[best_dir] + cell.upper[best_dir]);

    SplitRecord record;
    record.cell_index = worst;
    record.direction = best_dir;
    record.sigma_before = cell.space.sigma_est;
    record.sigma_minus = chosen.space_minus.sigma_est;
    record.sigma_plus = chosen.space_plus.sigma_est;
    family.history.push_back(record);

    ParameterCell minus;
    minus.lower = cell.lower;
    minus.upper = cell.upper;
    minus.upper[best_dir] = mid;
    minus.members = std::move(chosen.minus);
    minus.space = std::move(chosen.space_minus);

    ParameterCell plus;
    plus.lower = cell.lower;
    plus.upper = cell.upper;
    plus.lower[best_dir] = mid;
    plus.members = std::move(chosen.plus);
    plus.space = std::move(chosen.space_plus);

    const auto pos = family.cells.begin() + worst;
    *pos = std::move(minus);
    family.cells.insert(pos + 1, std::move(plus));
    return true;
  }
}

AdmissibleFamily build_family(const std::vector<FemVector>& snapshots,
                              const std::vector<ParameterPoint>& params,
                              const MeasurementSpace& ms, const H1Gram& gram,
                              const ParameterBox& root,
                              const PartitionOptions& options) {
  if (snapshots.empty()) {
    throw EmptyTrainingSet("build_family: no training snapshots");
  }
  if (snapshots.size() != params.size()) {
    throw DimensionMismatch(
        "build_family: snapshot and parameter counts disagree");
  }

  Eigen::VectorXd norms2(static_cast<int>(snapshots.size()));
  for (std::size_t i = 0; i < snapshots.size(); ++i) {
    norms2[static_cast<int>(i)] =
        gram.inner(snapshots[i], snapshots[i]);
  }

  AdmissibleFamily family;
  family.root = root;

  ParameterCell root_cell;
  root_cell.lower = root.lower;
  root_cell.upper = root.upper;
  root_cell.members.resize(snapshots.size());
  for (std::size_t i = 0; i < snapshots.size(); ++i) {
    root_cell.members[i] = static_cast<int>(i);
    if (!root.contains(params[i])) {
      throw OutOfBox("build_family: training parameter outside the root box");
    }
  }
  root_cell.space =
      build_cell_space(snapshots, root_cell.members, FemVector{}, ms, gram,
                       options.greedy, &norms2);
  family.cells.push_back(std::move(root_cell));

  for (int s = 0; s < options.n_splits; ++s) {
    if (options.sigma_target > 0.0 &&
        family.max_sigma() <= options.sigma_target) {
      break;
    }
    if (!split_step(family, snapshots, params, ms, gram, options, &norms2)) {
      break;
    }
  }
  return family;
}

}  // namespace multires
