#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace rggloc {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> y_err;  // optional error bars, empty or same length as y
};

struct ReferenceLine {
  double y = 0.0;
  std::string label;
};

void write_histogram_svg(std::ostream& os, const std::string& title, const std::string& xlabel,
                         const std::vector<double>& values, int bins = 40);

void write_line_plot_svg(std::ostream& os, const std::string& title, const std::string& xlabel,
                         const std::string& ylabel, const std::vector<Series>& series,
                         const std::optional<ReferenceLine>& reference = std::nullopt);

// Row-major cols x rows grid of values; cells with outline[i] set get a border.
void write_heatmap_svg(std::ostream& os, const std::string& title, int cols, int rows,
                       const std::vector<double>& values, const std::vector<bool>& outline);

}  // namespace rggloc
