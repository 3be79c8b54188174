// SPDX-License-Identifier: Apache-2.0
#include "multires/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "multires/errors.hpp"

namespace multires {

namespace {

constexpr double kWidth = 720, kHeight = 480;
constexpr double kLeft = 80, kRight = 24, kTop = 44, kBottom = 60;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b"};
constexpr int kPaletteSize = 6;

std::string esc(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '&')
      out += "&amp;";
    else if (c == '<')
      out += "&lt;";
    else if (c == '>')
      out += "&gt;";
    else
      out += c;
  }
  return out;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  bool ok() const { return lo <= hi; }
  void pad() {
    if (lo == hi) {
      lo -= 0.5;
      hi += 0.5;
    } else {
      double d = 0.05 * (hi - lo);
      lo -= d;
      hi += d;
    }
  }
};

// Tick step of the form {1,2,5}*10^k close to span/5.
double nice_step(double span) {
  double raw = span / 5.0;
  double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double r = raw / mag;
  double s = r < 1.5 ? 1 : (r < 3.5 ? 2 : (r < 7.5 ? 5 : 10));
  return s * mag;
}

std::vector<double> ticks_linear(const Range& r) {
  std::vector<double> t;
  double step = nice_step(r.hi - r.lo);
  double v = std::ceil(r.lo / step) * step;
  for (; v <= r.hi + 1e-12 * step; v += step) t.push_back(v);
  return t;
}

std::vector<double> ticks_log(const Range& r) {
  std::vector<double> t;
  int lo = static_cast<int>(std::floor(r.lo));
  int hi = static_cast<int>(std::ceil(r.hi));
  int step = std::max(1, (hi - lo) / 6);
  for (int k = lo; k <= hi; k += step) t.push_back(static_cast<double>(k));
  return t;
}

std::string tick_label(double v, bool log_axis) {
  if (!log_axis) return fmt(v);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "1e%d", static_cast<int>(std::lround(v)));
  return buf;
}

class Canvas {
 public:
  explicit Canvas(const std::filesystem::path& path) : out_(path) {
    if (!out_) throw StoreError("cannot open " + path.string() + " for writing");
    out_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
         << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " "
         << kHeight << "\">\n"
         << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  }
  ~Canvas() { out_ << "</svg>\n"; }

  void line(double x1, double y1, double x2, double y2, const char* stroke,
            double w = 1.0) {
    out_ << "<line x1=\"" << fmt(x1) << "\" y1=\"" << fmt(y1) << "\" x2=\""
         << fmt(x2) << "\" y2=\"" << fmt(y2) << "\" stroke=\"" << stroke
         << "\" stroke-width=\"" << fmt(w) << "\"/>\n";
  }
  void text(double x, double y, const std::string& s, int size,
            const char* anchor, const char* extra = "") {
    out_ << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(y)
         << "\" font-family=\"sans-serif\" font-size=\"" << size
         << "\" text-anchor=\"" << anchor << "\"" << extra << ">" << esc(s)
         << "</text>\n";
  }
  void circle(double x, double y, double r, const char* fill) {
    out_ << "<circle cx=\"" << fmt(x) << "\" cy=\"" << fmt(y) << "\" r=\""
         << fmt(r) << "\" fill=\"" << fill << "\"/>\n";
  }
  void rect(double x, double y, double w, double h, const char* fill) {
    out_ << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" width=\""
         << fmt(w) << "\" height=\"" << fmt(h) << "\" fill=\"" << fill
         << "\"/>\n";
  }
  void polyline(const std::vector<std::pair<double, double>>& pts,
                const char* stroke) {
    out_ << "<polyline fill=\"none\" stroke=\"" << stroke
         << "\" stroke-width=\"1.6\" points=\"";
    for (const auto& [x, y] : pts) out_ << fmt(x) << "," << fmt(y) << " ";
    out_ << "\"/>\n";
  }

 private:
  std::ofstream out_;
};

void draw_frame(Canvas& c, const PlotOptions& opts) {
  c.line(kLeft, kHeight - kBottom, kWidth - kRight, kHeight - kBottom, "black");
  c.line(kLeft, kTop, kLeft, kHeight - kBottom, "black");
  c.text(kWidth / 2, 24, opts.title, 15, "middle");
  c.text((kLeft + kWidth - kRight) / 2, kHeight - 14, opts.xlabel, 13, "middle");
  c.text(16, (kTop + kHeight - kBottom) / 2, opts.ylabel, 13, "middle",
         " transform=\"rotate(-90 16 240)\"");
}

void draw_legend(Canvas& c, const std::vector<PlotSeries>& series) {
  double lx = kWidth - kRight - 170, ly = kTop + 10;
  for (size_t i = 0; i < series.size(); ++i) {
    const char* color = kPalette[i % kPaletteSize];
    c.line(lx, ly + 5, lx + 24, ly + 5, color, 2.0);
    c.text(lx + 30, ly + 9, series[i].label, 12, "start");
    ly += 18;
  }
}

}  // namespace

void write_line_plot(const std::filesystem::path& path, const PlotOptions& opts,
                     const std::vector<PlotSeries>& series) {
  // Collect transformed coordinates first to establish the data window.
  Range rx, ry;
  std::vector<std::vector<std::pair<double, double>>> data(series.size());
  for (size_t i = 0; i < series.size(); ++i) {
    const PlotSeries& s = series[i];
    for (size_t k = 0; k < s.x.size() && k < s.y.size(); ++k) {
      double x = s.x[k], y = s.y[k];
      if (opts.logx && !(x > 0)) continue;
      if (opts.logy && !(y > 0)) continue;
      x = opts.logx ? std::log10(x) : x;
      y = opts.logy ? std::log10(y) : y;
      data[i].push_back({x, y});
      rx.add(x);
      ry.add(y);
    }
  }
  Canvas c(path);
  draw_frame(c, opts);
  if (!rx.ok() || !ry.ok()) return;  // nothing plottable, frame only
  rx.pad();
  ry.pad();
  auto px = [&](double x) {
    return kLeft + (x - rx.lo) / (rx.hi - rx.lo) * (kWidth - kLeft - kRight);
  };
  auto py = [&](double y) {
    return kHeight - kBottom -
           (y - ry.lo) / (ry.hi - ry.lo) * (kHeight - kTop - kBottom);
  };
  for (double t : (opts.logx ? ticks_log(rx) : ticks_linear(rx))) {
    if (t < rx.lo || t > rx.hi) continue;
    c.line(px(t), kHeight - kBottom, px(t), kTop, "#dddddd");
    c.line(px(t), kHeight - kBottom, px(t), kHeight - kBottom + 5, "black");
    c.text(px(t), kHeight - kBottom + 20, tick_label(t, opts.logx), 12, "middle");
  }
  for (double t : (opts.logy ? ticks_log(ry) : ticks_linear(ry))) {
    if (t < ry.lo || t > ry.hi) continue;
    c.line(kLeft, py(t), kWidth - kRight, py(t), "#dddddd");
    c.line(kLeft - 5, py(t), kLeft, py(t), "black");
    c.text(kLeft - 8, py(t) + 4, tick_label(t, opts.logy), 12, "end");
  }
  for (size_t i = 0; i < data.size(); ++i) {
    const char* color = kPalette[i % kPaletteSize];
    std::vector<std::pair<double, double>> pts;
    for (const auto& [x, y] : data[i]) pts.push_back({px(x), py(y)});
    if (pts.size() > 1) c.polyline(pts, color);
    for (const auto& [x, y] : pts) c.circle(x, y, 3.5, color);
  }
  draw_legend(c, series);
}

void write_grouped_bars(const std::filesystem::path& path,
                        const PlotOptions& opts,
                        const std::vector<std::string>& group_labels,
                        const std::vector<PlotSeries>& series) {
  Range ry;
  ry.add(0.0);
  for (const PlotSeries& s : series)
    for (double v : s.y) ry.add(v);
  if (ry.hi <= 0) ry.hi = 1;
  ry.hi *= 1.08;

  Canvas c(path);
  draw_frame(c, opts);
  double plot_w = kWidth - kLeft - kRight;
  double plot_h = kHeight - kTop - kBottom;
  auto py = [&](double y) { return kHeight - kBottom - y / ry.hi * plot_h; };
  for (double t : ticks_linear(ry)) {
    if (t < 0 || t > ry.hi) continue;
    c.line(kLeft, py(t), kWidth - kRight, py(t), "#dddddd");
    c.text(kLeft - 8, py(t) + 4, fmt(t), 12, "end");
  }
  size_t ngroups = group_labels.size();
  size_t nseries = std::max<size_t>(1, series.size());
  double group_w = plot_w / std::max<size_t>(1, ngroups);
  double bar_w = 0.8 * group_w / static_cast<double>(nseries);
  for (size_t g = 0; g < ngroups; ++g) {
    double gx = kLeft + (static_cast<double>(g) + 0.1) * group_w;
    for (size_t i = 0; i < series.size(); ++i) {
      double v = g < series[i].y.size() ? series[i].y[g] : 0.0;
      const char* color = kPalette[i % kPaletteSize];
      c.rect(gx + static_cast<double>(i) * bar_w, py(v), bar_w * 0.92,
             kHeight - kBottom - py(v), color);
    }
    c.text(kLeft + (static_cast<double>(g) + 0.5) * group_w,
           kHeight - kBottom + 20, group_labels[g], 12, "middle");
  }
  draw_legend(c, series);
}

}  // namespace multires
