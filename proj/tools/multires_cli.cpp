// SPDX-License-Identifier: Apache-2.0
// Command-line driver: offline store construction, the two benchmark
// experiments, and one-shot estimation from a measurement file.
#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "multires/config.hpp"
#include "multires/csv.hpp"
#include "multires/errors.hpp"
#include "multires/experiment.hpp"
#include "multires/version.hpp"

namespace {

struct CliState {
  std::string config_path;
  std::string store_dir;
  std::string w_file;
  int level = -1;
  int threads = 1;
  bool plots = false;
  std::vector<std::pair<std::string, std::string>> overrides;
};

const char* const kConfigKeys[] = {
    "c_rule",     "fine_level", "coarse_levels", "m",
    "meas_width", "n_train",    "n_test",        "seed",
    "n_splits",   "rb_max_dim", "solver_tol",    "sigma_target",
    "output_dir"};

void add_common_flags(CLI::App* cmd, CliState& st) {
  cmd->add_option("--config", st.config_path, "config file (key = value lines)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--store", st.store_dir,
                  "artifact store directory (default <output_dir>/store)");
  cmd->add_option("--threads", st.threads, "worker threads")
      ->check(CLI::PositiveNumber);
  for (const char* key : kConfigKeys) {
    cmd->add_option_function<std::string>(
        "--" + std::string(key),
        [&st, key](const std::string& v) { st.overrides.emplace_back(key, v); },
        "override config key " + std::string(key));
  }
}

multires::ExperimentConfig make_config(const CliState& st) {
  multires::ExperimentConfig cfg;
  if (!st.config_path.empty()) cfg = multires::parse_config_file(st.config_path);
  for (const auto& [key, value] : st.overrides)
    multires::apply_override(cfg, key, value);
  cfg.validate();
  return cfg;
}

std::string store_dir_of(const CliState& st,
                         const multires::ExperimentConfig& cfg) {
  return st.store_dir.empty() ? cfg.output_dir + "/store" : st.store_dir;
}

int do_offline(const CliState& st) {
  const multires::ExperimentConfig cfg = make_config(st);
  const std::string store = store_dir_of(st, cfg);
  multires::RunOptions opts{st.threads, false};
  const int k = multires::run_offline(cfg, store, opts);
  std::cout << "store written to " << store << "\n"
            << "cells: " << k << "\n";
  return 0;
}

int do_exp1(const CliState& st) {
  const multires::ExperimentConfig cfg = make_config(st);
  multires::RunOptions opts{st.threads, st.plots};
  const multires::Exp1Result res =
      multires::run_exp1(store_dir_of(st, cfg), cfg.output_dir, opts);
  std::cout << "level      h   mean|S_s - S_fine|   total wall [s]\n";
  for (size_t i = 0; i < res.levels.size(); ++i) {
    std::printf("%5d  %7.5f  %18.12g  %15.6f\n", res.levels[i],
                std::ldexp(1.0, -res.levels[i]), res.mean_abs_err[i],
                res.total_wall[i]);
  }
  std::cout << "fitted log-log slope: " << multires::csv_num(res.slope) << "\n"
            << "wall-time rank correlation vs level: "
            << multires::csv_num(res.spearman_wall) << "\n"
            << "global space: mu " << multires::csv_num(res.global_mu)
            << ", eps_est " << multires::csv_num(res.global_eps)
            << ", sigma_est " << multires::csv_num(res.global_sigma) << "\n"
            << "results: " << res.results_csv.string() << "\n";
  return 0;
}

int do_exp2(const CliState& st) {
  const multires::ExperimentConfig cfg = make_config(st);
  multires::RunOptions opts{st.threads, st.plots};
  const multires::Exp2Result res =
      multires::run_exp2(store_dir_of(st, cfg), cfg.output_dir, opts);
  std::cout << "cells: " << res.cells << ", test points: " << res.n_test
            << "\nlevel      h   agree_fine   agree_true\n";
  for (size_t i = 0; i < res.levels.size(); ++i) {
    std::printf("%5d  %7.5f  %11d  %11d\n", res.levels[i],
                std::ldexp(1.0, -res.levels[i]), res.agree_fine[i],
                res.agree_true[i]);
  }
  std::cout << "results: " << res.agreement_csv.string() << "\n";
  return 0;
}

int do_estimate(const CliState& st) {
  const multires::ExperimentConfig cfg = make_config(st);
  multires::RunOptions opts{st.threads, false};
  const multires::EstimateResult res = multires::run_estimate(
      store_dir_of(st, cfg), st.w_file, st.level, cfg.output_dir, opts);
  std::cout << "selected cell: " << res.selection.k_star + 1
            << (res.selection.tie ? " (tie, lowest index)" : "") << "\n"
            << "state: " << res.out_state.string() << "\n"
            << "details: " << res.out_json.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"state estimation with local reduced spaces and a coarse-mesh "
               "residual surrogate"};
  app.set_version_flag("--version", multires::kVersion);
  app.require_subcommand(1);

  CliState st;
  CLI::App* offline = app.add_subcommand(
      "offline", "sample snapshots, build measurements and the cell family, "
                 "write the store");
  add_common_flags(offline, st);
  CLI::App* exp1 = app.add_subcommand(
      "exp1", "surrogate accuracy and cost per level for the global space");
  add_common_flags(exp1, st);
  exp1->add_flag("--plots", st.plots, "emit SVG plots");
  CLI::App* exp2 = app.add_subcommand(
      "exp2", "coarse vs fine model-selection agreement for the cell family");
  add_common_flags(exp2, st);
  exp2->add_flag("--plots", st.plots, "emit SVG plots");
  CLI::App* estimate = app.add_subcommand(
      "estimate", "reconstruct one state from a measurement file");
  add_common_flags(estimate, st);
  estimate->add_option("w_file", st.w_file, "whitespace-separated measurements")
      ->required();
  estimate->add_option("--level", st.level,
                       "surrogate level for the selection (default: fine)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (offline->parsed()) return do_offline(st);
    if (exp1->parsed()) return do_exp1(st);
    if (exp2->parsed()) return do_exp2(st);
    if (estimate->parsed()) return do_estimate(st);
  } catch (const multires::InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const multires::NumericError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
