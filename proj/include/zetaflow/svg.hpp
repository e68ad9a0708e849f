#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "zetaflow/format.hpp"

namespace zetaflow {

struct SvgSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

// Plain polyline plot: white canvas, two axis lines, min/max tick labels,
// one colored polyline per series. Output is deterministic.
inline void write_svg(std::ostream& os, const std::vector<SvgSeries>& series,
                      const std::string& x_label,
                      const std::string& y_label) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0;
  double y0 = x0, y1 = -x0;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  }
  if (!(x0 < x1)) {
    x0 -= 0.5;
    x1 += 0.5;
  }
  if (!(y0 < y1)) {
    y0 -= 0.5;
    y1 += 0.5;
  }
  const double width = 960.0, height = 600.0;
  const double ml = 80.0, mr = 20.0, mt = 20.0, mb = 50.0;
  const auto px = [&](double x) {
    return ml + (x - x0) / (x1 - x0) * (width - ml - mr);
  };
  const auto py = [&](double y) {
    return height - mb - (y - y0) / (y1 - y0) * (height - mt - mb);
  };
  static const char* kPalette[] = {"#2460a7", "#c03028", "#2e8540", "#7450a0",
                                   "#c07820", "#207878", "#a03878", "#606060"};
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"960\" "
        "height=\"600\" viewBox=\"0 0 960 600\">\n";
  os << "<rect width=\"960\" height=\"600\" fill=\"white\"/>\n";
  os << "<line x1=\"" << format_double(ml) << "\" y1=\"" << format_double(py(y0))
     << "\" x2=\"" << format_double(px(x1)) << "\" y2=\""
     << format_double(py(y0)) << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << format_double(ml) << "\" y1=\"" << format_double(py(y0))
     << "\" x2=\"" << format_double(ml) << "\" y2=\"" << format_double(py(y1))
     << "\" stroke=\"black\"/>\n";
  os << "<text x=\"" << format_double(ml) << "\" y=\"580\" font-size=\"12\">"
     << format_double(x0) << "</text>\n";
  os << "<text x=\"" << format_double(px(x1) - 40.0)
     << "\" y=\"580\" font-size=\"12\">" << format_double(x1) << "</text>\n";
  os << "<text x=\"8\" y=\"" << format_double(py(y0))
     << "\" font-size=\"12\">" << format_double(y0) << "</text>\n";
  os << "<text x=\"8\" y=\"" << format_double(py(y1) + 10.0)
     << "\" font-size=\"12\">" << format_double(y1) << "</text>\n";
  os << "<text x=\"480\" y=\"596\" font-size=\"13\" text-anchor=\"middle\">"
     << x_label << "</text>\n";
  os << "<text x=\"14\" y=\"300\" font-size=\"13\" text-anchor=\"middle\" "
        "transform=\"rotate(-90 14 300)\">"
     << y_label << "</text>\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    os << "<polyline fill=\"none\" stroke=\"" << kPalette[i % 8]
       << "\" stroke-width=\"1\" points=\"";
    bool first = true;
    for (const auto& [x, y] : series[i].points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      if (!first) os << ' ';
      first = false;
      os << format_double(px(x)) << ',' << format_double(py(y));
    }
    os << "\"/>\n";
  }
  os << "</svg>\n";
}

}  // namespace zetaflow
