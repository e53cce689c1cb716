#include "ipp/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace ipp {

namespace {

// Viridis endpoints and three interior stops.
constexpr std::array<std::array<double, 3>, 5> kRamp{{
    {68, 1, 84},
    {59, 82, 139},
    {33, 145, 140},
    {94, 201, 98},
    {253, 231, 37},
}};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

void write_file(const std::string& text, const std::filesystem::path& out) {
  std::ofstream f(out, std::ios::binary);
  if (!f) {
    throw Error("cannot write SVG: " + out.string());
  }
  f << text;
  if (!f) {
    throw Error("failed writing SVG: " + out.string());
  }
}

}  // namespace

std::string ramp_color(double x) {
  if (!std::isfinite(x)) {
    x = 0.0;
  }
  x = std::clamp(x, 0.0, 1.0);
  const double pos = x * (kRamp.size() - 1);
  const std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(pos), kRamp.size() - 2);
  const double f = pos - static_cast<double>(i);
  char buf[8];
  int rgb[3];
  for (int c = 0; c < 3; ++c) {
    rgb[c] = static_cast<int>(std::lround(kRamp[i][c] * (1.0 - f) + kRamp[i + 1][c] * f));
  }
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
  return buf;
}

std::string heatmap_svg(const GridField& grid, const Path& overlay, int cell_px) {
  if (!grid.all_finite()) {
    throw Error("heatmap_svg: grid contains non-finite values");
  }
  const double lo = grid.min();
  const double span = grid.max() - lo;
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << grid.width() * cell_px << "\" height=\""
    << grid.height() * cell_px << "\">\n";
  for (int r = 0; r < grid.height(); ++r) {
    for (int c = 0; c < grid.width(); ++c) {
      const double x = span > 0.0 ? (grid(r, c) - lo) / span : 0.0;
      s << "<rect x=\"" << c * cell_px << "\" y=\"" << r * cell_px << "\" width=\"" << cell_px << "\" height=\""
        << cell_px << "\" fill=\"" << ramp_color(x) << "\"/>\n";
    }
  }
  const double half = cell_px / 2.0;
  if (overlay.size() > 1) {
    s << "<polyline fill=\"none\" stroke=\"#ffffff\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < overlay.size(); ++i) {
      s << (i ? " " : "") << fmt(overlay[i].col * cell_px + half) << "," << fmt(overlay[i].row * cell_px + half);
    }
    s << "\"/>\n";
  }
  for (const Cell& p : overlay) {
    s << "<circle cx=\"" << fmt(p.col * cell_px + half) << "\" cy=\"" << fmt(p.row * cell_px + half) << "\" r=\""
      << fmt(cell_px / 3.0) << "\" fill=\"#ff3030\" stroke=\"#ffffff\"/>\n";
  }
  s << "</svg>\n";
  return s.str();
}

void emit_heatmap_svg(const GridField& grid, const Path& overlay, const std::filesystem::path& out) {
  write_file(heatmap_svg(grid, overlay), out);
}

std::string line_chart_svg(const std::string& title, const std::vector<Series>& series, int width, int height) {
  static constexpr std::array<const char*, 8> kColors{"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                       "#9467bd", "#8c564b", "#e377c2", "#17becf"};
  double lo = INFINITY, hi = -INFINITY;
  std::size_t n = 0;
  for (const auto& sr : series) {
    for (double v : sr.y) {
      if (std::isfinite(v)) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
    n = std::max(n, sr.y.size());
  }
  if (!(hi > lo)) {
    lo = std::isfinite(lo) ? lo - 1.0 : 0.0;
    hi = lo + 2.0;
  }
  const double left = 60, right = 20, top = 30, bottom = 40;
  const double pw = width - left - right;
  const double ph = height - top - bottom;
  auto px = [&](std::size_t i) { return left + (n > 1 ? pw * static_cast<double>(i) / (n - 1) : 0.0); };
  auto py = [&](double v) { return top + ph * (1.0 - (v - lo) / (hi - lo)); };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
  s << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"#ffffff\"/>\n";
  s << "<text x=\"" << left << "\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n";
  s << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw << "\" y2=\"" << top + ph
    << "\" stroke=\"#000\"/>\n";
  s << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + ph
    << "\" stroke=\"#000\"/>\n";
  s << "<text x=\"4\" y=\"" << fmt(top + 10) << "\" font-family=\"sans-serif\" font-size=\"10\">" << fmt(hi)
    << "</text>\n";
  s << "<text x=\"4\" y=\"" << fmt(top + ph) << "\" font-family=\"sans-serif\" font-size=\"10\">" << fmt(lo)
    << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& sr = series[k];
    const char* color = kColors[k % kColors.size()];
    s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < sr.y.size(); ++i) {
      s << (i ? " " : "") << fmt(px(i)) << "," << fmt(py(sr.y[i]));
    }
    s << "\"/>\n";
    s << "<text x=\"" << fmt(left + pw - 120) << "\" y=\"" << fmt(top + 14.0 * (k + 1)) << "\" fill=\"" << color
      << "\" font-family=\"sans-serif\" font-size=\"11\">" << sr.label << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

void emit_line_chart_svg(const std::string& title, const std::vector<Series>& series,
                         const std::filesystem::path& out) {
  write_file(line_chart_svg(title, series), out);
}

}  // namespace ipp
