// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <vector>

#include "multires/partition.hpp"
#include "multires/surrogate.hpp"

namespace multires {

// PBDW reconstruction from one cell, with the residual functionals of the
// reconstruction precomputed at the fine level so surrogate values at any
// coarser level only need restriction and lifting.
struct CellCandidate {
  int cell = -1;
  FemVector state;
  std::vector<DualVector> fine_duals;
};

struct SelectionResult {
  int k_star = -1;   // winning cell index
  int level = 0;     // surrogate level used for the decision
  FemVector state;   // reconstruction of the winning cell
  std::vector<double> surrogate_values;  // per cell; +inf for excluded cells
  std::vector<int> unstable_cells;
  bool tie = false;
  bool all_converged = true;
};

/// Index of the smallest value, ties resolved to the lowest index; the tie
/// flag reports whether the minimum is attained more than once.
int argmin_tie_lowest(const std::vector<double>& values, bool* tie = nullptr);

/// One PBDW reconstruction per cell. Cells whose estimate is unstable are
/// skipped and reported; if every cell is skipped the estimator cannot
/// answer and AllCellsUnstable is thrown.
std::vector<CellCandidate> build_candidates(const AdmissibleFamily& family,
                                            const MeasurementSpace& ms,
                                            const Eigen::VectorXd& w,
                                            const SurrogateEvaluator& evaluator,
                                            std::vector<int>* unstable = nullptr);

/// Surrogate-based model selection among precomputed candidates.
SelectionResult select_from(const std::vector<CellCandidate>& candidates,
                            const std::vector<int>& unstable, int cell_count,
                            const SurrogateEvaluator& evaluator, int level);

/// Candidates + selection in one call.
SelectionResult select(const AdmissibleFamily& family,
                       const MeasurementSpace& ms, const Eigen::VectorXd& w,
                       const SurrogateEvaluator& evaluator, int level);

/// The final state estimate u*(w) at the given surrogate level.
FemVector estimate(const AdmissibleFamily& family, const MeasurementSpace& ms,
                   const Eigen::VectorXd& w, const SurrogateEvaluator& evaluator,
                   int level);

}  // namespace multires
