#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ipp/grid.hpp"
#include "ipp/planners.hpp"

namespace ipp {

/// "#rrggbb" for x in [0, 1] on a fixed five-stop viridis-like ramp.
std::string ramp_color(double x);

/// Cell rectangles colored over [min, max], optionally overlaid with a waypoint path.
std::string heatmap_svg(const GridField& grid, const Path& overlay = {}, int cell_px = 12);
void emit_heatmap_svg(const GridField& grid, const Path& overlay, const std::filesystem::path& out);

struct Series {
  std::string label;
  std::vector<double> y;
};

/// Polyline chart of one or more series over x = 1..n.
std::string line_chart_svg(const std::string& title, const std::vector<Series>& series, int width = 640,
                           int height = 400);
void emit_line_chart_svg(const std::string& title, const std::vector<Series>& series,
                         const std::filesystem::path& out);

}  // namespace ipp
