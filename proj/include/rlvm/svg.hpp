#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace rlvm {

// Self-contained SVG charts for the comparison reports. Output is plain
// vector graphics with fixed number formatting, so identical inputs give
// identical bytes.

struct BarGroup {
  std::string label;                // e.g. request name
  std::vector<double> values;       // one per series, NaN renders as a gap
};

std::string grouped_bar_svg(const std::string& title, const std::string& y_label,
                            const std::vector<std::string>& series,
                            const std::vector<BarGroup>& groups);

struct LineSeries {
  std::string name;
  std::vector<double> y;  // x is the index
};

std::string line_chart_svg(const std::string& title, const std::string& x_label,
                           const std::string& y_label, const std::vector<LineSeries>& series);

void write_svg(const std::filesystem::path& path, const std::string& svg);

}  // namespace rlvm
