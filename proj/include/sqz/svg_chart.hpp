#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace sqz {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;  // NaN breaks the line
  bool markers = true;
};

struct LineChart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  int width = 720;
  int height = 460;
  std::optional<std::pair<double, double>> x_range;
  std::optional<std::pair<double, double>> y_range;
  // Dashed vertical guides, e.g. pulse edges.
  std::vector<double> x_marks;
};

/// Standalone SVG document.
std::string render_svg(const LineChart& chart);
void write_svg(const std::filesystem::path& path, const LineChart& chart);

/// Roughly `target` round tick positions (1, 2, 5 times a power of ten) covering [lo, hi].
std::vector<double> nice_ticks(double lo, double hi, int target = 6);

}  // namespace sqz
