#ifndef POCS_TOOLS_SVG_PLOT_HPP
#define POCS_TOOLS_SVG_PLOT_HPP

#include <string>
#include <utility>
#include <vector>

namespace pocs::plot {

struct Series {
  explicit Series(std::string l = {}) : label(std::move(l)) {}

  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool line = true;
  bool markers = false;
  // Optional vertical error bars (absolute lower / upper ends).
  std::vector<double> lo;
  std::vector<double> hi;
};

struct Figure {
  std::string title;
  std::string xlabel;
  std::string ylabel;
  bool log_x = false;
  std::vector<Series> series;
};

// Short %g-style label for legends.
std::string compact(double v);

// Line / scatter plot as a standalone SVG document. Non-finite points are skipped.
std::string render_svg(const Figure& fig);

}  // namespace pocs::plot

#endif  // POCS_TOOLS_SVG_PLOT_HPP
