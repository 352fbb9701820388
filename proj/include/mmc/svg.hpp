#pragma once

#include <string>
#include <utility>
#include <vector>

namespace mmc {

struct PlotSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;  // sorted by x by the caller
};

// Minimal SVG line chart: axes, ticks, one polyline per series (split at gaps
// wider than `gap_x`), and a legend. No external plotting stack.
std::string render_line_plot(const std::string& title, const std::string& xlabel,
                             const std::string& ylabel,
                             const std::vector<PlotSeries>& series,
                             double gap_x = 0.0);

// Writes `content` to `path`, throwing IoError on failure.
void write_text_file(const std::string& path, const std::string& content);

}  // namespace mmc
