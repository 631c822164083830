#pragma once

// SVG output: the K(r) curve with its asymptote guides, and planar projections
// of trajectories.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "plcycles/averaging.hpp"
#include "plcycles/errors.hpp"
#include "plcycles/flow.hpp"

namespace plcycles {

namespace detail {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

struct Panel {
  double x0, y0, width, height;  // pixel box
  double xmin, xmax, ymin, ymax;  // data box

  double px(double x) const { return x0 + (x - xmin) / (xmax - xmin) * width; }
  double py(double y) const { return y0 + height - (y - ymin) / (ymax - ymin) * height; }
};

inline void frame(std::ostream& os, const Panel& p, const std::string& xlabel,
                  const std::string& ylabel, const std::string& title) {
  os << "<rect x=\"" << fmt(p.x0) << "\" y=\"" << fmt(p.y0) << "\" width=\"" << fmt(p.width)
     << "\" height=\"" << fmt(p.height) << "\" fill=\"none\" stroke=\"black\"/>\n";
  os << "<text x=\"" << fmt(p.x0 + p.width / 2) << "\" y=\"" << fmt(p.y0 + p.height + 32)
     << "\" text-anchor=\"middle\">" << xlabel << "</text>\n";
  os << "<text x=\"" << fmt(p.x0 - 40) << "\" y=\"" << fmt(p.y0 + p.height / 2)
     << "\" text-anchor=\"middle\">" << ylabel << "</text>\n";
  os << "<text x=\"" << fmt(p.x0 + p.width / 2) << "\" y=\"" << fmt(p.y0 - 10)
     << "\" text-anchor=\"middle\">" << title << "</text>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = p.xmin + (p.xmax - p.xmin) * k / 4.0;
    const double yv = p.ymin + (p.ymax - p.ymin) * k / 4.0;
    os << "<text x=\"" << fmt(p.px(xv)) << "\" y=\"" << fmt(p.y0 + p.height + 15)
       << "\" font-size=\"10\" text-anchor=\"middle\">" << fmt(xv) << "</text>\n";
    os << "<text x=\"" << fmt(p.x0 - 5) << "\" y=\"" << fmt(p.py(yv) + 3)
       << "\" font-size=\"10\" text-anchor=\"end\">" << fmt(yv) << "</text>\n";
  }
}

inline void polyline(std::ostream& os, const Panel& p,
                     const std::vector<std::pair<double, double>>& pts, const char* color) {
  os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.2\" points=\"";
  for (std::size_t k = 0; k < pts.size(); ++k) {
    if (k) os << ' ';
    os << fmt(p.px(pts[k].first)) << ',' << fmt(p.py(pts[k].second));
  }
  os << "\"/>\n";
}

inline std::string svg_open(double w, double h) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(w) + "\" height=\"" + fmt(h) +
         "\" font-family=\"sans-serif\" font-size=\"12\">\n";
}

}  // namespace detail

/// Samples of K on (1, r_max], first point just right of 1.
inline std::vector<std::pair<double, double>> k_curve_samples(double r_max, int samples) {
  if (!(r_max > 1.0)) throw DomainError("k-curve: r_max must be > 1");
  if (samples < 2) throw DomainError("k-curve: need at least 2 samples");
  std::vector<std::pair<double, double>> pts;
  for (int k = 1; k <= samples; ++k) {
    const double r = 1.0 + (r_max - 1.0) * k / samples;
    pts.emplace_back(r, big_k(r));
  }
  return pts;
}

/// marker: radius to highlight (e.g. the radial zero of a report), drawn when inside the range.
inline std::string plot_k_curve(double r_max = 20.0, int samples = 400,
                                std::optional<double> marker = std::nullopt) {
  const auto pts = k_curve_samples(r_max, samples);
  detail::Panel p{70, 40, 560, 360, 1.0, r_max, 3.0, 4.1};
  std::ostringstream os;
  os << detail::svg_open(680, 460);
  detail::frame(os, p, "r", "K(r)", "K(r) on (1, " + detail::fmt(r_max) + "]");
  for (double level : {kPi, 4.0}) {
    os << "<line x1=\"" << detail::fmt(p.px(p.xmin)) << "\" y1=\"" << detail::fmt(p.py(level))
       << "\" x2=\"" << detail::fmt(p.px(p.xmax)) << "\" y2=\"" << detail::fmt(p.py(level))
       << "\" stroke=\"gray\" stroke-dasharray=\"6,4\"/>\n";
  }
  os << "<text x=\"" << detail::fmt(p.px(p.xmax) - 4) << "\" y=\"" << detail::fmt(p.py(kPi) - 4)
     << "\" text-anchor=\"end\" fill=\"gray\">pi</text>\n";
  os << "<text x=\"" << detail::fmt(p.px(p.xmax) - 4) << "\" y=\"" << detail::fmt(p.py(4.0) - 4)
     << "\" text-anchor=\"end\" fill=\"gray\">4</text>\n";
  detail::polyline(os, p, pts, "steelblue");
  if (marker && *marker > 1.0 && *marker <= r_max) {
    os << "<circle cx=\"" << detail::fmt(p.px(*marker)) << "\" cy=\""
       << detail::fmt(p.py(big_k(*marker))) << "\" r=\"4\" fill=\"firebrick\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

/// (x1, x2) projection, plus (x3, x4) when the state has at least four coordinates.
inline std::string plot_orbit(const Trajectory& traj) {
  if (traj.empty()) throw DomainError("orbit plot: trajectory is empty");
  const Eigen::Index dim = traj.states.front().size();
  const int panels = dim >= 4 ? 2 : 1;
  std::ostringstream os;
  os << detail::svg_open(80 + 420 * panels, 480);
  for (int k = 0; k < panels; ++k) {
    const Eigen::Index ix = 2 * k;
    std::vector<std::pair<double, double>> pts;
    double lim = 0.0;
    for (const auto& x : traj.states) {
      pts.emplace_back(x(ix), x(ix + 1));
      lim = std::max({lim, std::abs(x(ix)), std::abs(x(ix + 1))});
    }
    lim = lim > 0.0 ? 1.1 * lim : 1.0;
    detail::Panel p{70.0 + 420.0 * k, 40, 360, 360, -lim, lim, -lim, lim};
    const std::string a = "x" + std::to_string(ix + 1);
    const std::string b = "x" + std::to_string(ix + 2);
    detail::frame(os, p, a, b, "(" + a + ", " + b + ")");
    detail::polyline(os, p, pts, "firebrick");
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace plcycles
