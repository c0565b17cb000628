#pragma once

#include <string>
#include <vector>

namespace trapping::cli {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  /// Written verbatim into a leading XML comment.
  std::string provenance;
};

/// Standalone SVG line plot. Non-finite points, and nonpositive ones on a
/// log axis, are dropped.
std::string line_plot_svg(const PlotSpec& spec, const std::vector<Series>& series);

}  // namespace trapping::cli
