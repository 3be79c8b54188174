// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace multires {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotOptions {
  std::string title;
  std::string xlabel;
  std::string ylabel;
  bool logx = false;
  bool logy = false;
};

/// Line plot with markers; nonpositive values are dropped on log axes.
void write_line_plot(const std::filesystem::path& path,
                     const PlotOptions& opts,
                     const std::vector<PlotSeries>& series);

/// Grouped bar chart: one group per label, one bar per series within a group.
void write_grouped_bars(const std::filesystem::path& path,
                        const PlotOptions& opts,
                        const std::vector<std::string>& group_labels,
                        const std::vector<PlotSeries>& series);

}  // namespace multires
