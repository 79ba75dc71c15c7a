#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "dot/coupling.hpp"
#include "dot/error.hpp"

namespace dot {

// Minimal direct SVG emission: a log-scale coupling heatmap and a log-log
// scatter with a fitted line.  No plotting dependency; output is plain XML.

namespace svg_detail {

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

inline std::string color_for(double t) {
  // t in [0,1]: white -> dark blue
  const int r = static_cast<int>(std::round(255.0 * (1.0 - 0.85 * t)));
  const int g = static_cast<int>(std::round(250.0 * (1.0 - 0.80 * t)));
  const int b = 255;
  std::ostringstream os;
  os << "rgb(" << r << ',' << g << ',' << b << ')';
  return os.str();
}

}  // namespace svg_detail

// Heatmap of a 2-marginal coupling colored by log10(density) over `decades`
// orders of magnitude below the max; exact-zero cells are hatched.
inline std::string coupling_heatmap_svg(const Coupling& c, const std::string& title,
                                        double decades = 6.0) {
  if (c.marginals().count() != 2)
    throw config_error("heatmap requires a 2-marginal coupling");
  const std::size_t rows = c.shape().dim(0);
  const std::size_t cols = c.shape().dim(1);
  const double cell = 18.0;
  const double margin = 46.0;
  const double width = margin * 2 + cell * static_cast<double>(cols);
  const double height = margin * 2 + cell * static_cast<double>(rows) + 24.0;

  double dmax = 0.0;
  for (double d : c.density()) dmax = std::max(dmax, d);
  const double lmax = std::log10(std::max(dmax, 1e-300));

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << svg_detail::fmt(width)
     << "\" height=\"" << svg_detail::fmt(height) << "\" viewBox=\"0 0 "
     << svg_detail::fmt(width) << ' ' << svg_detail::fmt(height) << "\">\n";
  os << "  <defs>\n"
        "    <pattern id=\"hatch\" width=\"6\" height=\"6\" patternUnits=\"userSpaceOnUse\" "
        "patternTransform=\"rotate(45)\">\n"
        "      <rect width=\"6\" height=\"6\" fill=\"white\"/>\n"
        "      <line x1=\"0\" y1=\"0\" x2=\"0\" y2=\"6\" stroke=\"#bbbbbb\" stroke-width=\"1.5\"/>\n"
        "    </pattern>\n"
        "  </defs>\n";
  os << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "  <text x=\"" << svg_detail::fmt(width / 2) << "\" y=\"24\" text-anchor=\"middle\" "
        "font-family=\"sans-serif\" font-size=\"14\">"
     << title << "</text>\n";

  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const double d = c.density()[i * cols + j];
      const double x = margin + cell * static_cast<double>(j);
      const double y = margin + cell * static_cast<double>(i);
      std::string fill;
      if (d <= 0.0) {
        fill = "url(#hatch)";
      } else {
        const double t =
            std::clamp(1.0 - (lmax - std::log10(d)) / decades, 0.0, 1.0);
        fill = svg_detail::color_for(t);
      }
      os << "  <rect x=\"" << svg_detail::fmt(x) << "\" y=\"" << svg_detail::fmt(y)
         << "\" width=\"" << svg_detail::fmt(cell) << "\" height=\"" << svg_detail::fmt(cell)
         << "\" fill=\"" << fill << "\" stroke=\"#888888\" stroke-width=\"0.4\"/>\n";
    }
  }
  os << "  <text x=\"" << svg_detail::fmt(margin) << "\" y=\""
     << svg_detail::fmt(height - 10.0)
     << "\" font-family=\"sans-serif\" font-size=\"11\">rows: marginal 1 atoms, cols: marginal 2 "
        "atoms; hatched = exact zero; shade = log10 density over "
     << svg_detail::fmt(decades) << " decades</text>\n";
  os << "</svg>\n";
  return os.str();
}

// Log-log scatter of (x, y) points with the fitted power-law line.
inline std::string loglog_plot_svg(const std::vector<double>& xs, const std::vector<double>& ys,
                                   const std::string& title, const std::string& xlabel,
                                   const std::string& ylabel, double fit_slope,
                                   double fit_intercept_log) {
  if (xs.size() != ys.size() || xs.empty()) throw config_error("loglog plot: empty data");
  const double width = 460, height = 360, ml = 64, mr = 20, mt = 40, mb = 52;

  double lx_min = std::numeric_limits<double>::infinity(), lx_max = -lx_min;
  double ly_min = lx_min, ly_max = -lx_min;
  std::vector<double> lx(xs.size()), ly(ys.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0))
      throw config_error("loglog plot: data must be positive");
    lx[i] = std::log10(xs[i]);
    ly[i] = std::log10(ys[i]);
    lx_min = std::min(lx_min, lx[i]);
    lx_max = std::max(lx_max, lx[i]);
    ly_min = std::min(ly_min, ly[i]);
    ly_max = std::max(ly_max, ly[i]);
  }
  const double padx = std::max(0.05, 0.08 * (lx_max - lx_min));
  const double pady = std::max(0.05, 0.12 * (ly_max - ly_min));
  lx_min -= padx; lx_max += padx; ly_min -= pady; ly_max += pady;

  auto px = [&](double v) { return ml + (v - lx_min) / (lx_max - lx_min) * (width - ml - mr); };
  auto py = [&](double v) { return height - mb - (v - ly_min) / (ly_max - ly_min) * (height - mt - mb); };

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  os << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "  <text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" "
        "font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n";
  // axes
  os << "  <line x1=\"" << ml << "\" y1=\"" << height - mb << "\" x2=\"" << width - mr
     << "\" y2=\"" << height - mb << "\" stroke=\"black\"/>\n";
  os << "  <line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\""
     << height - mb << "\" stroke=\"black\"/>\n";
  // decade ticks
  for (int d = static_cast<int>(std::ceil(lx_min)); d <= static_cast<int>(std::floor(lx_max)); ++d) {
    os << "  <line x1=\"" << svg_detail::fmt(px(d)) << "\" y1=\"" << height - mb << "\" x2=\""
       << svg_detail::fmt(px(d)) << "\" y2=\"" << height - mb + 5 << "\" stroke=\"black\"/>\n";
    os << "  <text x=\"" << svg_detail::fmt(px(d)) << "\" y=\"" << height - mb + 18
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">1e" << d
       << "</text>\n";
  }
  for (int d = static_cast<int>(std::ceil(ly_min)); d <= static_cast<int>(std::floor(ly_max)); ++d) {
    os << "  <line x1=\"" << ml - 5 << "\" y1=\"" << svg_detail::fmt(py(d)) << "\" x2=\"" << ml
       << "\" y2=\"" << svg_detail::fmt(py(d)) << "\" stroke=\"black\"/>\n";
    os << "  <text x=\"" << ml - 8 << "\" y=\"" << svg_detail::fmt(py(d) + 3)
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">1e" << d
       << "</text>\n";
  }
  // fitted line (in natural logs: log y = intercept + slope log x)
  {
    const double l10 = std::log(10.0);
    auto fit_ly = [&](double lx10) { return (fit_intercept_log + fit_slope * (lx10 * l10)) / l10; };
    os << "  <line x1=\"" << svg_detail::fmt(px(lx_min + padx / 2)) << "\" y1=\""
       << svg_detail::fmt(py(fit_ly(lx_min + padx / 2))) << "\" x2=\""
       << svg_detail::fmt(px(lx_max - padx / 2)) << "\" y2=\""
       << svg_detail::fmt(py(fit_ly(lx_max - padx / 2)))
       << "\" stroke=\"#cc3333\" stroke-width=\"1.5\"/>\n";
  }
  for (std::size_t i = 0; i < lx.size(); ++i)
    os << "  <circle cx=\"" << svg_detail::fmt(px(lx[i])) << "\" cy=\""
       << svg_detail::fmt(py(ly[i])) << "\" r=\"3.5\" fill=\"#224488\"/>\n";
  os << "  <text x=\"" << width / 2 << "\" y=\"" << height - 14
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << xlabel
     << " (slope " << svg_detail::fmt(fit_slope) << ")</text>\n";
  os << "  <text x=\"16\" y=\"" << height / 2
     << "\" font-family=\"sans-serif\" font-size=\"11\" transform=\"rotate(-90 16 "
     << height / 2 << ")\" text-anchor=\"middle\">" << ylabel << "</text>\n";
  os << "</svg>\n";
  return os.str();
}

}  // namespace dot
