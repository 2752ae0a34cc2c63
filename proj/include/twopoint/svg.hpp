#pragma once

// Minimal line-plot SVG writer: fixed 800x500 view box, polylines, axes with
// ticks, labels and a legend. Output depends only on the data passed in.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "twopoint/errors.hpp"

namespace twopoint {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<PlotSeries> series;
  bool equal_aspect = false;  // same scale on both axes (paths in the plane)
};

namespace detail {

inline std::string num(double v, const char* f = "%.2f") {
  char buf[40];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Step of 1, 2 or 5 times a power of ten giving about `target` intervals.
inline double nice_step(double span, int target) {
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * mag >= raw) return m * mag;
  }
  return 10.0 * mag;
}

}  // namespace detail

inline void write_svg_plot(std::ostream& os, const PlotSpec& spec) {
  constexpr double kW = 800.0, kH = 500.0;
  constexpr double kLeft = 80.0, kRight = 30.0, kTop = 50.0, kBottom = 60.0;
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : spec.series) {
    if (s.x.size() != s.y.size()) throw DomainError("series '" + s.label + "' x/y size mismatch");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  }
  if (!std::isfinite(x0)) x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
  if (x1 - x0 <= 0.0) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 <= 0.0) y0 -= 0.5, y1 += 0.5;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;

  const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
  double sx = pw / (x1 - x0), sy = ph / (y1 - y0);
  if (spec.equal_aspect) {
    const double s = std::min(sx, sy);
    const double cx = 0.5 * (x0 + x1), cy = 0.5 * (y0 + y1);
    sx = sy = s;
    x0 = cx - 0.5 * pw / s, x1 = cx + 0.5 * pw / s;
    y0 = cy - 0.5 * ph / s, y1 = cy + 0.5 * ph / s;
  }
  auto px = [&](double x) { return kLeft + (x - x0) * sx; };
  auto py = [&](double y) { return kTop + ph - (y - y0) * sy; };

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 500\" width=\"800\" "
        "height=\"500\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect x=\"0\" y=\"0\" width=\"800\" height=\"500\" fill=\"white\"/>\n";
  os << "<text x=\"400\" y=\"28\" text-anchor=\"middle\" font-size=\"16\">"
     << detail::escape(spec.title) << "</text>\n";

  // Grid and ticks
  os << "<g stroke=\"#dddddd\" stroke-width=\"1\">\n";
  const double xs = detail::nice_step(x1 - x0, 8), ys = detail::nice_step(y1 - y0, 6);
  std::vector<double> xt, yt;
  for (double t = std::ceil(x0 / xs) * xs; t <= x1 + 1e-9 * xs; t += xs) xt.push_back(t);
  for (double t = std::ceil(y0 / ys) * ys; t <= y1 + 1e-9 * ys; t += ys) yt.push_back(t);
  for (double t : xt) {
    os << "<line x1=\"" << detail::num(px(t)) << "\" y1=\"" << detail::num(kTop) << "\" x2=\""
       << detail::num(px(t)) << "\" y2=\"" << detail::num(kTop + ph) << "\"/>\n";
  }
  for (double t : yt) {
    os << "<line x1=\"" << detail::num(kLeft) << "\" y1=\"" << detail::num(py(t)) << "\" x2=\""
       << detail::num(kLeft + pw) << "\" y2=\"" << detail::num(py(t)) << "\"/>\n";
  }
  os << "</g>\n";
  os << "<rect x=\"" << detail::num(kLeft) << "\" y=\"" << detail::num(kTop) << "\" width=\""
     << detail::num(pw) << "\" height=\"" << detail::num(ph)
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  auto tick = [](double t, double step) {
    const double v = std::abs(t) < 1e-9 * step ? 0.0 : t;
    return detail::num(v, "%g");
  };
  for (double t : xt) {
    os << "<text x=\"" << detail::num(px(t)) << "\" y=\"" << detail::num(kTop + ph + 18)
       << "\" text-anchor=\"middle\">" << tick(t, xs) << "</text>\n";
  }
  for (double t : yt) {
    os << "<text x=\"" << detail::num(kLeft - 8) << "\" y=\"" << detail::num(py(t) + 4)
       << "\" text-anchor=\"end\">" << tick(t, ys) << "</text>\n";
  }
  os << "<text x=\"" << detail::num(kLeft + 0.5 * pw) << "\" y=\"" << detail::num(kH - 15)
     << "\" text-anchor=\"middle\">" << detail::escape(spec.x_label) << "</text>\n";
  os << "<text x=\"20\" y=\"" << detail::num(kTop + 0.5 * ph)
     << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 " << detail::num(kTop + 0.5 * ph)
     << ")\">" << detail::escape(spec.y_label) << "</text>\n";

  // Series
  for (std::size_t k = 0; k < spec.series.size(); ++k) {
    const auto& s = spec.series[k];
    os << "<polyline class=\"series\" data-label=\"" << detail::escape(s.label)
       << "\" fill=\"none\" stroke=\"" << kColors[k % std::size(kColors)]
       << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      os << (i ? " " : "") << detail::num(px(s.x[i])) << ',' << detail::num(py(s.y[i]));
    }
    os << "\"/>\n";
  }

  // Legend
  const double lx = kLeft + pw - 170, ly = kTop + 10;
  os << "<rect x=\"" << detail::num(lx) << "\" y=\"" << detail::num(ly)
     << "\" width=\"160\" height=\"" << detail::num(20.0 * spec.series.size() + 8)
     << "\" fill=\"white\" stroke=\"#999999\"/>\n";
  for (std::size_t k = 0; k < spec.series.size(); ++k) {
    const double y = ly + 18 + 20.0 * k;
    os << "<line x1=\"" << detail::num(lx + 8) << "\" y1=\"" << detail::num(y - 4) << "\" x2=\""
       << detail::num(lx + 32) << "\" y2=\"" << detail::num(y - 4) << "\" stroke=\""
       << kColors[k % std::size(kColors)] << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << detail::num(lx + 40) << "\" y=\"" << detail::num(y) << "\">"
       << detail::escape(spec.series[k].label) << "</text>\n";
  }
  os << "</svg>\n";
}

}  // namespace twopoint
