#pragma once

#include <string>
#include <utility>
#include <vector>

namespace locodl::cli {

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;  // (x, y); y <= 0 is dropped on the log axis
};

struct ChartOptions {
  std::string x_label;
  std::string y_label;
  int width = 800;
  int height = 500;
};

/// Line chart with a linear x axis and a log10 y axis with one tick per decade.
/// Emits exactly one <polyline> per series and one legend entry per series.
std::string render_line_chart(const std::vector<Series>& series, const ChartOptions& options);

/// Decade exponents covering [lo, hi] (both > 0): floor(log10 lo) .. ceil(log10 hi).
std::vector<int> decade_ticks(double lo, double hi);

}  // namespace locodl::cli
