#pragma once

#include <string>
#include <vector>

namespace maxrf {

struct SvgSeries {
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  bool points = false;  // draw markers instead of a line
  std::string label;
};

// Shaded vertical bands (e.g. masked intervals), in data coordinates.
struct SvgBand {
  double x0 = 0.0;
  double x1 = 0.0;
  std::string color = "#cccccc";
};

// Minimal dependency-free line/scatter plot.
void write_svg_plot(const std::string& path, const std::vector<SvgSeries>& series,
                    const std::vector<SvgBand>& bands, const std::string& title,
                    const std::string& x_label, const std::string& y_label);

}  // namespace maxrf
