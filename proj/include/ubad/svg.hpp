#pragma once

#include <string>
#include <vector>

#include "ubad/deviation.hpp"

namespace ubad {

struct SvgSeries {
  std::string label;
  std::string color = "#888888";
  double stroke_width = 1.0;
  std::vector<std::pair<double, double>> points;
};

// Minimal line chart: axes, tick labels, one polyline per series, a legend
// for the named series.
std::string svg_line_chart(const std::string& title, const std::string& x_label,
                           const std::string& y_label, const std::vector<SvgSeries>& series,
                           int width = 720, int height = 420);

// Grid view of a compound matrix: user block above group block, one row per
// (feature, frame), one column per day; blue negative, red positive.
std::string svg_matrix_heatmap(const CompoundMatrix& matrix, const FrameConfig& frames,
                               double delta_cap);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace ubad
