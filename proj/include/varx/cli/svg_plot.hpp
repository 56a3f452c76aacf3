#pragma once

// Minimal static SVG charts: scatter markers and polylines on linear or
// log10 axes. Output depends only on the input data.

#include <iosfwd>
#include <string>
#include <vector>

namespace varx::cli {

enum class Stroke { markers, solid, dashed, dotted };

struct Series {
  std::string label;
  std::string color;
  Stroke stroke = Stroke::solid;
  std::vector<double> x;
  std::vector<double> y;  // non-finite (or non-positive on a log axis) points are skipped
};

struct Panel {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  std::vector<Series> series;
  std::vector<double> vlines;  // vertical dotted markers at these x values
};

/// Panels are laid out side by side.
void write_svg(std::ostream& os, const std::vector<Panel>& panels);

}  // namespace varx::cli
