// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <vector>

#include "multires/config.hpp"
#include "multires/pipeline.hpp"
#include "multires/store.hpp"

namespace multires {

struct RunOptions {
  int threads = 1;
  bool plots = false;
};

/// Offline phase: snapshots, measurements, global space, partition family;
/// everything persisted under store_dir. Returns the number of cells K.
int run_offline(const ExperimentConfig& cfg,
                const std::filesystem::path& store_dir, const RunOptions& opts);

// Surrogate accuracy and cost across levels, driven by the global space.
// The value CSVs are deterministic; wall-clock readings go to separate
// timing CSVs so reruns stay byte-comparable.
struct Exp1Result {
  std::vector<int> levels;           // coarse ascending, then fine
  std::vector<double> mean_abs_err;  // mean |S_s - S_fine| per level
  std::vector<double> mean_s;        // mean S_s per level
  std::vector<double> total_wall;    // seconds per level, all test points
  double slope = 0.0;                // log-log fit over the coarse levels
  double spearman_wall = 0.0;        // wall vs level rank correlation
  double global_mu = 0.0;
  double global_eps = 0.0;
  double global_sigma = 0.0;
  std::filesystem::path results_csv;
  std::filesystem::path summary_csv;
  std::filesystem::path slope_csv;
  std::filesystem::path timing_csv;
  std::filesystem::path wall_by_level_csv;
};

Exp1Result run_exp1(const std::filesystem::path& store_dir,
                    const std::filesystem::path& out_dir,
                    const RunOptions& opts);

// Model-selection agreement between coarse and fine surrogates.
struct Exp2Result {
  std::vector<int> levels;
  std::vector<int> agree_fine;  // #{k*_s == k*_fine} per level
  std::vector<int> agree_true;  // #{k*_s == k*_true} per level
  int n_test = 0;
  int cells = 0;
  std::vector<int> hist_fine;  // selection counts per cell at the fine level
  std::vector<int> hist_true;  // cell of the generating parameter
  std::filesystem::path selections_csv;
  std::filesystem::path agreement_csv;
};

Exp2Result run_exp2(const std::filesystem::path& store_dir,
                    const std::filesystem::path& out_dir,
                    const RunOptions& opts);

struct EstimateResult {
  SelectionResult selection;
  std::filesystem::path out_json;
  std::filesystem::path out_state;  // raw float64 nodal values of u*
};

/// Single-shot reconstruction from a whitespace-separated measurement file.
/// level < 0 means the store's fine level.
EstimateResult run_estimate(const std::filesystem::path& store_dir,
                            const std::filesystem::path& w_file, int level,
                            const std::filesystem::path& out_dir,
                            const RunOptions& opts);

/// Least-squares slope of log(y) against log(x); pairs with nonpositive
/// entries are skipped; 0 when fewer than two usable pairs remain.
double fit_slope_loglog(const std::vector<double>& x,
                        const std::vector<double>& y);

/// Spearman rank correlation with midranks for ties.
double spearman_rho(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace multires
