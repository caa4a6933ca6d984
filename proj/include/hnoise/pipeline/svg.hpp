#pragma once

#include <string>
#include <vector>

namespace hnoise::pipeline {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  bool dashed = false;
  /// Draw points as small circles instead of a connected line.
  bool markers = false;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = true;
  bool log_y = true;
  int width = 720;
  int height = 480;
  std::vector<PlotSeries> series;
};

/// Static SVG document. Points that cannot be placed on a log axis (<= 0)
/// or are not finite are dropped.
std::string render_svg(const PlotSpec& plot);

/// Colour for the i-th series of a plot.
std::string palette(std::size_t i);

}  // namespace hnoise::pipeline
