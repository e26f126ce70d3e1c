#pragma once

#include <string>
#include <vector>

namespace tunnelfuse {

struct PlotSeries {
  std::string label;
  std::string color;  // any SVG colour
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  /// Equal scaling on both axes (top-down maps).
  bool equal_aspect = false;
  int width = 800;
  int height = 600;
};

/// Self-contained SVG line chart with axes, ticks and a legend. Series with
/// mismatched x/y lengths are truncated to the shorter one.
std::string render_line_plot(const PlotSpec& spec, const std::vector<PlotSeries>& series);

}  // namespace tunnelfuse
