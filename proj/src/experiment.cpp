// SPDX-License-Identifier: Apache-2.0
#include "multires/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "multires/csv.hpp"
#include "multires/errors.hpp"
#include "multires/parallel.hpp"
#include "multires/reduced_basis.hpp"
#include "multires/rng.hpp"
#include "multires/surrogate.hpp"
#include "multires/svg.hpp"

namespace multires {

namespace {

// Independent RNG streams derived from the config seed.
constexpr std::uint64_t kTrainStream = 0;
constexpr std::uint64_t kTestStream = 1;
constexpr std::uint64_t kMeasStream = 2;

double sigma_from(double mu, double eps) {
  if (std::isfinite(mu)) return mu * eps;
  return eps > 0 ? std::numeric_limits<double>::infinity() : 0.0;
}

FemVector mean_snapshot(const std::vector<FemVector>& snaps) {
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(snaps.at(0).coeffs.size());
  for (const FemVector& u : snaps) acc += u.coeffs;
  return FemVector{snaps[0].level, acc / static_cast<double>(snaps.size())};
}

/// Coarse levels ascending, fine level last.
std::vector<int> level_schedule(const ExperimentConfig& cfg) {
  std::vector<int> lv = cfg.coarse_levels;
  std::sort(lv.begin(), lv.end());
  lv.erase(std::unique(lv.begin(), lv.end()), lv.end());
  lv.push_back(cfg.fine_level);
  return lv;
}

// Everything the online commands rebuild deterministically from a store.
struct OnlineContext {
  OfflineArtifacts art;
  AffineParametricProblem problem;
  GramHierarchy grams;
  MeasurementSpace ms;

  explicit OnlineContext(const std::filesystem::path& store_dir)
      : art(load_offline(store_dir)),
        problem(build_diffusion_problem(art.config.fine_level,
                                        art.config.c_rule)),
        ms(make_measurements_with_boxes(grams.at(art.config.fine_level),
                                        art.boxes)) {}
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

nlohmann::json json_real(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

}  // namespace

double fit_slope_loglog(const std::vector<double>& x,
                        const std::vector<double>& y) {
  std::vector<double> lx, ly;
  for (size_t i = 0; i < x.size() && i < y.size(); ++i) {
    if (x[i] > 0 && y[i] > 0) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  const size_t n = lx.size();
  if (n < 2) return 0.0;
  double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / static_cast<double>(n);
  double my = std::accumulate(ly.begin(), ly.end(), 0.0) / static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  return sxx > 0 ? sxy / sxx : 0.0;
}

namespace {

std::vector<double> midranks(const std::vector<double>& v) {
  const size_t n = v.size();
  std::vector<size_t> idx(n);
  std::iota(idx.begin(), idx.end(), size_t{0});
  std::sort(idx.begin(), idx.end(),
            [&](size_t a, size_t b) { return v[a] < v[b]; });
  std::vector<double> rank(n, 0.0);
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
    double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (size_t k = i; k <= j; ++k) rank[idx[k]] = r;
    i = j + 1;
  }
  return rank;
}

}  // namespace

double spearman_rho(const std::vector<double>& a,
                    const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) return 0.0;
  std::vector<double> ra = midranks(a), rb = midranks(b);
  const auto n = static_cast<double>(a.size());
  double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (size_t i = 0; i < ra.size(); ++i) {
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
    sab += (ra[i] - ma) * (rb[i] - mb);
  }
  return saa > 0 && sbb > 0 ? sab / std::sqrt(saa * sbb) : 0.0;
}

int run_offline(const ExperimentConfig& cfg,
                const std::filesystem::path& store_dir,
                const RunOptions& opts) {
  cfg.validate();
  OfflineArtifacts art;
  art.config = cfg;

  AffineParametricProblem problem =
      build_diffusion_problem(cfg.fine_level, cfg.c_rule);
  GramHierarchy grams;
  const H1Gram& gram = grams.at(cfg.fine_level);

  art.y_train = sample_parameters(cfg.n_train,
                                  derive_stream_seed(cfg.seed, kTrainStream),
                                  problem.box);
  art.y_test = sample_parameters(cfg.n_test,
                                 derive_stream_seed(cfg.seed, kTestStream),
                                 problem.box);

  art.u_train.resize(static_cast<size_t>(cfg.n_train));
  art.u_test.resize(static_cast<size_t>(cfg.n_test));
  parallel_for(cfg.n_train + cfg.n_test, opts.threads, [&](int i) {
    if (i < cfg.n_train) {
      art.u_train[static_cast<size_t>(i)] =
          solve_forward(problem, art.y_train[static_cast<size_t>(i)],
                        cfg.solver_tol);
    } else {
      const int k = i - cfg.n_train;
      art.u_test[static_cast<size_t>(k)] =
          solve_forward(problem, art.y_test[static_cast<size_t>(k)],
                        cfg.solver_tol);
    }
  });

  MeasurementSpace ms = make_measurements(
      gram, cfg.m, cfg.meas_width, derive_stream_seed(cfg.seed, kMeasStream));
  art.boxes = ms.boxes();

  GreedyOptions gopt;
  gopt.max_dim = cfg.resolved_rb_max_dim();
  std::vector<int> all(static_cast<size_t>(cfg.n_train));
  std::iota(all.begin(), all.end(), 0);
  art.global =
      greedy_build(art.u_train, all, mean_snapshot(art.u_train), gram, gopt);
  art.global.mu = inf_sup(art.global, ms);
  art.global.sigma_est = sigma_from(art.global.mu, art.global.eps_est());

  PartitionOptions popt;
  popt.n_splits = cfg.n_splits;
  popt.sigma_target = cfg.sigma_target;
  popt.greedy = gopt;
  popt.threads = opts.threads;
  art.family =
      build_family(art.u_train, art.y_train, ms, gram, problem.box, popt);

  save_offline(store_dir, art);
  return art.family.size();
}

Exp1Result run_exp1(const std::filesystem::path& store_dir,
                    const std::filesystem::path& out_dir,
                    const RunOptions& opts) {
  OnlineContext ctx(store_dir);
  const ExperimentConfig& cfg = ctx.art.config;
  std::filesystem::create_directories(out_dir);
  SurrogateEvaluator evaluator(ctx.problem, ctx.grams);

  const std::vector<int> levels = level_schedule(cfg);
  const int nlv = static_cast<int>(levels.size());
  const int n = static_cast<int>(ctx.art.u_test.size());

  struct PointRow {
    std::vector<double> s, wall;
    std::vector<char> conv;
  };
  std::vector<PointRow> rows(static_cast<size_t>(n));
  parallel_for(n, opts.threads, [&](int i) {
    const Eigen::VectorXd w = ctx.ms.measure(ctx.art.u_test[static_cast<size_t>(i)]);
    const FemVector u = pbdw_estimate(ctx.art.global, ctx.ms, w);
    const std::vector<DualVector> duals = evaluator.fine_duals(u);
    PointRow row;
    row.s.resize(static_cast<size_t>(nlv));
    row.wall.resize(static_cast<size_t>(nlv));
    row.conv.resize(static_cast<size_t>(nlv));
    for (int li = 0; li < nlv; ++li) {
      const auto t0 = std::chrono::steady_clock::now();
      const SurrogateResult sr =
          evaluator.evaluate_from_duals(duals, levels[static_cast<size_t>(li)]);
      row.wall[static_cast<size_t>(li)] = seconds_since(t0);
      row.s[static_cast<size_t>(li)] = sr.value;
      row.conv[static_cast<size_t>(li)] = sr.converged ? 1 : 0;
    }
    rows[static_cast<size_t>(i)] = std::move(row);
  });

  Exp1Result res;
  res.levels = levels;
  res.global_mu = ctx.art.global.mu;
  res.global_eps = ctx.art.global.eps_est();
  res.global_sigma = ctx.art.global.sigma_est;

  res.results_csv = out_dir / "exp1_results.csv";
  CsvWriter results(res.results_csv, {"test_idx", "level", "h", "s_level",
                                      "s_fine", "abs_err", "converged"});
  const size_t fine_slot = static_cast<size_t>(nlv) - 1;
  for (int i = 0; i < n; ++i) {
    const PointRow& row = rows[static_cast<size_t>(i)];
    const double s_fine = row.s[fine_slot];
    for (int li = 0; li < nlv; ++li) {
      const double s = row.s[static_cast<size_t>(li)];
      results.row({csv_num(i), csv_num(levels[static_cast<size_t>(li)]),
                   csv_num(std::ldexp(1.0, -levels[static_cast<size_t>(li)])),
                   csv_num(s), csv_num(s_fine), csv_num(std::abs(s - s_fine)),
                   csv_num(static_cast<int>(row.conv[static_cast<size_t>(li)]))});
    }
  }
  results.close();

  res.mean_abs_err.assign(static_cast<size_t>(nlv), 0.0);
  res.mean_s.assign(static_cast<size_t>(nlv), 0.0);
  res.total_wall.assign(static_cast<size_t>(nlv), 0.0);
  for (int i = 0; i < n; ++i) {
    const PointRow& row = rows[static_cast<size_t>(i)];
    for (size_t li = 0; li < static_cast<size_t>(nlv); ++li) {
      res.mean_abs_err[li] += std::abs(row.s[li] - row.s[fine_slot]);
      res.mean_s[li] += row.s[li];
      res.total_wall[li] += row.wall[li];
    }
  }
  for (size_t li = 0; li < static_cast<size_t>(nlv); ++li) {
    res.mean_abs_err[li] /= std::max(1, n);
    res.mean_s[li] /= std::max(1, n);
  }

  std::vector<double> hs, errs;
  for (size_t li = 0; li + 1 < static_cast<size_t>(nlv); ++li) {
    hs.push_back(std::ldexp(1.0, -levels[li]));
    errs.push_back(res.mean_abs_err[li]);
  }
  res.slope = fit_slope_loglog(hs, errs);
  {
    std::vector<double> lv_d(levels.begin(), levels.end());
    res.spearman_wall = spearman_rho(lv_d, res.total_wall);
  }

  res.summary_csv = out_dir / "exp1_summary.csv";
  CsvWriter summary(res.summary_csv,
                    {"level", "h", "mean_abs_err", "mean_s"});
  for (size_t li = 0; li < static_cast<size_t>(nlv); ++li) {
    summary.row({csv_num(levels[li]), csv_num(std::ldexp(1.0, -levels[li])),
                 csv_num(res.mean_abs_err[li]), csv_num(res.mean_s[li])});
  }
  summary.close();

  res.slope_csv = out_dir / "exp1_slope.csv";
  CsvWriter slope(res.slope_csv,
                  {"slope", "levels_used", "global_mu", "global_eps",
                   "global_sigma"});
  slope.row({csv_num(res.slope), csv_num(static_cast<int>(hs.size())),
             csv_num(res.global_mu), csv_num(res.global_eps),
             csv_num(res.global_sigma)});
  slope.close();

  // Wall-clock readings live in their own files: they differ run to run,
  // while everything above is byte-stable for a fixed store.
  res.timing_csv = out_dir / "exp1_timing.csv";
  CsvWriter timing(res.timing_csv, {"test_idx", "level", "wall_seconds"});
  for (int i = 0; i < n; ++i)
    for (size_t li = 0; li < static_cast<size_t>(nlv); ++li)
      timing.row({csv_num(i), csv_num(levels[li]),
                  csv_num(rows[static_cast<size_t>(i)].wall[li])});
  timing.close();

  res.wall_by_level_csv = out_dir / "exp1_wall_by_level.csv";
  CsvWriter wall(res.wall_by_level_csv,
                 {"level", "h", "total_wall_seconds", "mean_wall_seconds"});
  for (size_t li = 0; li < static_cast<size_t>(nlv); ++li)
    wall.row({csv_num(levels[li]), csv_num(std::ldexp(1.0, -levels[li])),
              csv_num(res.total_wall[li]),
              csv_num(res.total_wall[li] / std::max(1, n))});
  wall.close();

  if (opts.plots) {
    PlotSeries err_series{"mean |S_s - S_fine|", hs, errs};
    PlotOptions perr;
    perr.title = "Surrogate error vs mesh width";
    perr.xlabel = "h";
    perr.ylabel = "mean abs error";
    perr.logx = true;
    perr.logy = true;
    write_line_plot(out_dir / "exp1_error.svg", perr, {err_series});

    std::vector<double> all_hs, walls;
    for (size_t li = 0; li < static_cast<size_t>(nlv); ++li) {
      all_hs.push_back(std::ldexp(1.0, -levels[li]));
      walls.push_back(res.total_wall[li]);
    }
    PlotSeries wall_series{"total seconds", all_hs, walls};
    PlotOptions pw;
    pw.title = "Surrogate wall time vs mesh width";
    pw.xlabel = "h";
    pw.ylabel = "seconds";
    pw.logx = true;
    pw.logy = true;
    write_line_plot(out_dir / "exp1_wall.svg", pw, {wall_series});
  }
  return res;
}

Exp2Result run_exp2(const std::filesystem::path& store_dir,
                    const std::filesystem::path& out_dir,
                    const RunOptions& opts) {
  OnlineContext ctx(store_dir);
  const ExperimentConfig& cfg = ctx.art.config;
  std::filesystem::create_directories(out_dir);
  SurrogateEvaluator evaluator(ctx.problem, ctx.grams);
  const H1Gram& fine_gram = ctx.grams.at(cfg.fine_level);

  const std::vector<int> levels = level_schedule(cfg);
  const int nlv = static_cast<int>(levels.size());
  const int n = static_cast<int>(ctx.art.u_test.size());
  const int K = ctx.art.family.size();

  struct PointRow {
    std::vector<int> k;  // selection per level, 0-based
    int k_true = -1;
    double err = 0.0;
    std::vector<double> s_fine_cells;
    char all_converged = 1;
    char any_tie = 0;
  };
  std::vector<PointRow> rows(static_cast<size_t>(n));
  parallel_for(n, opts.threads, [&](int i) {
    const FemVector& u = ctx.art.u_test[static_cast<size_t>(i)];
    const Eigen::VectorXd w = ctx.ms.measure(u);
    std::vector<int> unstable;
    const std::vector<CellCandidate> cands =
        build_candidates(ctx.art.family, ctx.ms, w, evaluator, &unstable);
    PointRow row;
    row.k.resize(static_cast<size_t>(nlv));
    for (int li = 0; li < nlv; ++li) {
      const SelectionResult sel = select_from(cands, unstable, K, evaluator,
                                              levels[static_cast<size_t>(li)]);
      row.k[static_cast<size_t>(li)] = sel.k_star;
      if (!sel.all_converged) row.all_converged = 0;
      if (sel.tie) row.any_tie = 1;
      if (li == nlv - 1) {
        row.s_fine_cells = sel.surrogate_values;
        const FemVector diff{u.level, u.coeffs - sel.state.coeffs};
        row.err = fine_gram.norm(diff);
      }
    }
    row.k_true = ctx.art.family.locate(ctx.art.y_test[static_cast<size_t>(i)]);
    rows[static_cast<size_t>(i)] = std::move(row);
  });

  Exp2Result res;
  res.levels = levels;
  res.n_test = n;
  res.cells = K;
  res.agree_fine.assign(static_cast<size_t>(nlv), 0);
  res.agree_true.assign(static_cast<size_t>(nlv), 0);
  res.hist_fine.assign(static_cast<size_t>(K), 0);
  res.hist_true.assign(static_cast<size_t>(K), 0);
  const size_t fine_slot = static_cast<size_t>(nlv) - 1;
  for (const PointRow& row : rows) {
    for (size_t li = 0; li < static_cast<size_t>(nlv); ++li) {
      if (row.k[li] == row.k[fine_slot]) ++res.agree_fine[li];
      if (row.k[li] == row.k_true) ++res.agree_true[li];
    }
    ++res.hist_fine[static_cast<size_t>(row.k[fine_slot])];
    ++res.hist_true[static_cast<size_t>(row.k_true)];
  }

  // Per-test-point detail; cell indices are 1-based in all outputs.
  res.selections_csv = out_dir / "exp2_selections.csv";
  std::vector<std::string> header{"test_idx"};
  for (int s : levels) header.push_back("k_level_" + std::to_string(s));
  header.push_back("k_fine");
  header.push_back("k_true");
  header.push_back("err_h1");
  for (int k = 1; k <= K; ++k)
    header.push_back("s_fine_cell_" + std::to_string(k));
  header.push_back("converged");
  header.push_back("tie");
  CsvWriter detail(res.selections_csv, header);
  for (int i = 0; i < n; ++i) {
    const PointRow& row = rows[static_cast<size_t>(i)];
    std::vector<std::string> cells{csv_num(i)};
    for (size_t li = 0; li < static_cast<size_t>(nlv); ++li)
      cells.push_back(csv_num(row.k[li] + 1));
    cells.push_back(csv_num(row.k[fine_slot] + 1));
    cells.push_back(csv_num(row.k_true + 1));
    cells.push_back(csv_num(row.err));
    for (int k = 0; k < K; ++k)
      cells.push_back(csv_num(row.s_fine_cells[static_cast<size_t>(k)]));
    cells.push_back(csv_num(static_cast<int>(row.all_converged)));
    cells.push_back(csv_num(static_cast<int>(row.any_tie)));
    detail.row(cells);
  }
  detail.close();

  res.agreement_csv = out_dir / "exp2_agreement.csv";
  CsvWriter agree(res.agreement_csv, {"c_rule", "level", "h", "n_test",
                                      "agree_fine", "agree_true"});
  for (size_t li = 0; li < static_cast<size_t>(nlv); ++li)
    agree.row({csv_num(cfg.c_rule), csv_num(levels[li]),
               csv_num(std::ldexp(1.0, -levels[li])), csv_num(n),
               csv_num(res.agree_fine[li]), csv_num(res.agree_true[li])});
  agree.close();

  if (opts.plots) {
    std::vector<std::string> labels;
    for (int k = 1; k <= K; ++k) labels.push_back(std::to_string(k));
    PlotSeries fine_series{"fine selection", {}, {}};
    PlotSeries true_series{"true cell", {}, {}};
    for (int k = 0; k < K; ++k) {
      fine_series.y.push_back(res.hist_fine[static_cast<size_t>(k)]);
      true_series.y.push_back(res.hist_true[static_cast<size_t>(k)]);
    }
    PlotOptions ph;
    ph.title = "Selected cell vs generating cell";
    ph.xlabel = "cell";
    ph.ylabel = "count";
    write_grouped_bars(out_dir / "exp2_histogram.svg", ph, labels,
                       {fine_series, true_series});
  }
  return res;
}

EstimateResult run_estimate(const std::filesystem::path& store_dir,
                            const std::filesystem::path& w_file, int level,
                            const std::filesystem::path& out_dir,
                            const RunOptions& opts) {
  (void)opts;
  OnlineContext ctx(store_dir);
  const ExperimentConfig& cfg = ctx.art.config;
  const int lv = level < 0 ? cfg.fine_level : level;
  if (lv < 2 || lv > cfg.fine_level)
    throw ConfigError("surrogate level must lie in [2, fine_level]");

  std::ifstream in(w_file);
  if (!in) throw InvalidInput("cannot open measurement file " + w_file.string());
  std::vector<double> values;
  double v = 0.0;
  while (in >> v) values.push_back(v);
  if (!in.eof())
    throw InvalidInput("measurement file " + w_file.string() +
                       " holds non-numeric data");
  if (static_cast<int>(values.size()) != ctx.ms.size())
    throw DimensionMismatch(
        "measurement file holds " + std::to_string(values.size()) +
        " values, expected " + std::to_string(ctx.ms.size()));
  const Eigen::VectorXd w = Eigen::Map<Eigen::VectorXd>(
      values.data(), static_cast<Eigen::Index>(values.size()));

  SurrogateEvaluator evaluator(ctx.problem, ctx.grams);
  EstimateResult res;
  res.selection = select(ctx.art.family, ctx.ms, w, evaluator, lv);

  std::filesystem::create_directories(out_dir);
  res.out_state = out_dir / "u_star.f64";
  write_raw_f64(res.out_state, res.selection.state.coeffs);

  nlohmann::json j;
  j["k_star"] = res.selection.k_star + 1;
  j["level"] = lv;
  j["tie"] = res.selection.tie;
  j["all_converged"] = res.selection.all_converged;
  {
    nlohmann::json vals = nlohmann::json::array();
    for (double s : res.selection.surrogate_values) vals.push_back(json_real(s));
    j["surrogate_values"] = vals;
  }
  {
    std::vector<int> unstable;
    for (int k : res.selection.unstable_cells) unstable.push_back(k + 1);
    j["unstable_cells"] = unstable;
  }
  j["state_file"] = "u_star.f64";
  j["state_count"] = res.selection.state.coeffs.size();
  res.out_json = out_dir / "estimate.json";
  std::ofstream out(res.out_json, std::ios::binary);
  if (!out) throw StoreError("cannot write " + res.out_json.string());
  out << j.dump(2) << '\n';
  return res;
}

}  // namespace multires
