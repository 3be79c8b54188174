// SPDX-License-Identifier: Apache-2.0
#include "multires/pipeline.hpp"

#include <algorithm>
#include <limits>

#include "multires/errors.hpp"
#include "multires/reduced_basis.hpp"

namespace multires {

int argmin_tie_lowest(const std::vector<double>& values, bool* tie) {
  int best = -1;
  double best_v = std::numeric_limits<double>::infinity();
  for (int i = 0; i < static_cast<int>(values.size()); ++i) {
    if (values[i] < best_v) {
      best_v = values[i];
      best = i;
    }
  }
  if (tie != nullptr) {
    int hits = 0;
    for (double v : values)
      if (v == best_v) ++hits;
    *tie = hits > 1;
  }
  return best;
}

std::vector<CellCandidate> build_candidates(const AdmissibleFamily& family,
                                            const MeasurementSpace& ms,
                                            const Eigen::VectorXd& w,
                                            const SurrogateEvaluator& evaluator,
                                            std::vector<int>* unstable) {
  if (family.cells.empty()) throw EmptyTrainingSet("partition has no cells");
  std::vector<CellCandidate> out;
  std::vector<int> skipped;
  for (int k = 0; k < static_cast<int>(family.cells.size()); ++k) {
    const ParameterCell& cell = family.cells[k];
    CellCandidate cand;
    cand.cell = k;
    try {
      cand.state = pbdw_estimate(cell.space, ms, w);
    } catch (const UnstableEstimate&) {
      skipped.push_back(k);
      continue;
    }
    cand.fine_duals = evaluator.fine_duals(cand.state);
    out.push_back(std::move(cand));
  }
  if (unstable != nullptr) *unstable = skipped;
  if (out.empty())
    throw AllCellsUnstable("every local estimate was unstable for this data");
  return out;
}

SelectionResult select_from(const std::vector<CellCandidate>& candidates,
                            const std::vector<int>& unstable, int cell_count,
                            const SurrogateEvaluator& evaluator, int level) {
  if (candidates.empty())
    throw AllCellsUnstable("no candidate reconstructions to select from");
  SelectionResult res;
  res.level = level;
  res.unstable_cells = unstable;
  res.surrogate_values.assign(static_cast<size_t>(cell_count),
                              std::numeric_limits<double>::infinity());

  std::vector<double> finite(candidates.size());
  for (size_t i = 0; i < candidates.size(); ++i) {
    SurrogateResult sr =
        evaluator.evaluate_from_duals(candidates[i].fine_duals, level);
    finite[i] = sr.value;
    res.surrogate_values[static_cast<size_t>(candidates[i].cell)] = sr.value;
    if (!sr.converged) res.all_converged = false;
  }
  int pick = argmin_tie_lowest(finite, &res.tie);
  res.k_star = candidates[static_cast<size_t>(pick)].cell;
  res.state = candidates[static_cast<size_t>(pick)].state;
  return res;
}

SelectionResult select(const AdmissibleFamily& family,
                       const MeasurementSpace& ms, const Eigen::VectorXd& w,
                       const SurrogateEvaluator& evaluator, int level) {
  std::vector<int> unstable;
  std::vector<CellCandidate> cands =
      build_candidates(family, ms, w, evaluator, &unstable);
  return select_from(cands, unstable, static_cast<int>(family.cells.size()),
                     evaluator, level);
}

FemVector estimate(const AdmissibleFamily& family, const MeasurementSpace& ms,
                   const Eigen::VectorXd& w, const SurrogateEvaluator& evaluator,
                   int level) {
  return select(family, ms, w, evaluator, level).state;
}

}  // namespace multires
