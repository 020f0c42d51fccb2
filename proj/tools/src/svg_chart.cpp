#include "locodl/cli/svg_chart.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "locodl/error.hpp"

namespace locodl::cli {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

}  // namespace

std::vector<int> decade_ticks(double lo, double hi) {
  if (!(lo > 0.0) || !(hi > 0.0) || lo > hi) throw InputError("decade_ticks: need 0 < lo <= hi");
  const int first = static_cast<int>(std::floor(std::log10(lo)));
  int last = static_cast<int>(std::ceil(std::log10(hi)));
  if (last == first) ++last;
  std::vector<int> ticks;
  for (int e = first; e <= last; ++e) ticks.push_back(e);
  return ticks;
}

std::string render_line_chart(const std::vector<Series>& series, const ChartOptions& options) {
  double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
  double y_lo = x_lo, y_hi = -x_lo;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y) || y <= 0.0) continue;
      x_lo = std::min(x_lo, x);
      x_hi = std::max(x_hi, x);
      y_lo = std::min(y_lo, y);
      y_hi = std::max(y_hi, y);
    }
  }
  if (!std::isfinite(x_lo)) {
    x_lo = 0.0, x_hi = 1.0;
    y_lo = 1e-1, y_hi = 1.0;
  }
  if (x_hi == x_lo) x_hi = x_lo + 1.0;
  const std::vector<int> ticks = decade_ticks(y_lo, y_hi);
  const double ly_lo = ticks.front(), ly_hi = ticks.back();

  const double left = 80, right = 180, top = 20, bottom = 50;
  const double w = options.width - left - right;
  const double h = options.height - top - bottom;
  auto px = [&](double x) { return left + (x - x_lo) / (x_hi - x_lo) * w; };
  auto py = [&](double y) { return top + (ly_hi - std::log10(y)) / (ly_hi - ly_lo) * h; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << options.width << "\" height=\"" << options.height
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg << "<rect x=\"0\" y=\"0\" width=\"" << options.width << "\" height=\"" << options.height
      << "\" fill=\"white\"/>\n";
  svg << "<g class=\"axes\" stroke=\"black\">\n";
  svg << "<line x1=\"" << num(left) << "\" y1=\"" << num(top + h) << "\" x2=\"" << num(left + w) << "\" y2=\""
      << num(top + h) << "\"/>\n";
  svg << "<line x1=\"" << num(left) << "\" y1=\"" << num(top) << "\" x2=\"" << num(left) << "\" y2=\""
      << num(top + h) << "\"/>\n";
  svg << "</g>\n";

  svg << "<g class=\"yticks\">\n";
  for (int e : ticks) {
    const double y = py(std::pow(10.0, e));
    svg << "<line x1=\"" << num(left - 5) << "\" y1=\"" << num(y) << "\" x2=\"" << num(left) << "\" y2=\"" << num(y)
        << "\" stroke=\"black\"/>";
    svg << "<text class=\"ytick\" x=\"" << num(left - 8) << "\" y=\"" << num(y + 4)
        << "\" text-anchor=\"end\">1e" << e << "</text>\n";
  }
  svg << "</g>\n";

  svg << "<g class=\"xticks\">\n";
  for (int i = 0; i <= 4; ++i) {
    const double x = x_lo + (x_hi - x_lo) * i / 4.0;
    svg << "<text x=\"" << num(px(x)) << "\" y=\"" << num(top + h + 16) << "\" text-anchor=\"middle\">"
        << short_num(x) << "</text>\n";
  }
  svg << "</g>\n";
  svg << "<text x=\"" << num(left + w / 2) << "\" y=\"" << num(options.height - 10.0)
      << "\" text-anchor=\"middle\">" << escape(options.x_label) << "</text>\n";
  svg << "<text transform=\"rotate(-90)\" x=\"" << num(-(top + h / 2)) << "\" y=\"16\" text-anchor=\"middle\">"
      << escape(options.y_label) << " (log)</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % std::size(kPalette)];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (const auto& [x, y] : series[s].points) {
      if (!std::isfinite(x) || !std::isfinite(y) || y <= 0.0) continue;
      if (!first) svg << ' ';
      svg << num(px(x)) << ',' << num(py(y));
      first = false;
    }
    svg << "\"/>\n";
  }

  svg << "<g class=\"legend\">\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    const double y = top + 10 + 18.0 * s;
    const double x = left + w + 15;
    svg << "<g class=\"legend-entry\"><line x1=\"" << num(x) << "\" y1=\"" << num(y) << "\" x2=\"" << num(x + 20)
        << "\" y2=\"" << num(y) << "\" stroke=\"" << kPalette[s % std::size(kPalette)]
        << "\" stroke-width=\"2\"/><text x=\"" << num(x + 25) << "\" y=\"" << num(y + 4) << "\">"
        << escape(series[s].label) << "</text></g>\n";
  }
  svg << "</g>\n</svg>\n";
  return svg.str();
}

}  // namespace locodl::cli
