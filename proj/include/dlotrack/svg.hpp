#pragma once

// Static SVG report: symmetric frame error over time, and an x-y overlay of
// the estimated chain against ground truth at one frame.

#include "dlotrack/types.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace dlotrack {

namespace detail {

inline std::string fmt2(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

struct Frame2d {
  double x0, y0, w, h;          // panel rectangle
  double lx, hx, ly, hy;        // data range
  double px(double x) const { return x0 + (hx > lx ? (x - lx) / (hx - lx) : 0.5) * w; }
  double py(double y) const { return y0 + h - (hy > ly ? (y - ly) / (hy - ly) : 0.5) * h; }
};

}  // namespace detail

inline std::string render_svg(const TrackTrace& trace, const std::vector<Points>& truth, std::size_t snapshot) {
  if (trace.empty()) throw Error("empty trace");
  const double W = 1000, H = 420, pad = 50;
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  // Error panel.
  double max_err = 0.0;
  for (const auto& e : trace.entries())
    if (e.error) max_err = std::max(max_err, e.error->symmetric);
  detail::Frame2d ep{pad, pad, W / 2 - 1.5 * pad, H - 2 * pad,
                     static_cast<double>(trace.entries().front().frame_index),
                     static_cast<double>(trace.entries().back().frame_index), 0.0, max_err > 0 ? max_err : 1.0};
  os << "<text x=\"" << ep.x0 << "\" y=\"" << pad - 20 << "\">symmetric frame error vs frame</text>\n";
  os << "<rect x=\"" << ep.x0 << "\" y=\"" << ep.y0 << "\" width=\"" << ep.w << "\" height=\"" << ep.h
     << "\" fill=\"none\" stroke=\"#888\"/>\n";
  os << "<text x=\"" << ep.x0 << "\" y=\"" << ep.y0 + ep.h + 16 << "\">" << static_cast<long>(ep.lx) << "</text>\n";
  os << "<text x=\"" << ep.x0 + ep.w - 30 << "\" y=\"" << ep.y0 + ep.h + 16 << "\">" << static_cast<long>(ep.hx)
     << "</text>\n";
  os << "<text x=\"" << 4 << "\" y=\"" << ep.y0 + 10 << "\">" << detail::fmt2(ep.hy) << "</text>\n";
  os << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
  for (const auto& e : trace.entries())
    if (e.error)
      os << detail::fmt2(ep.px(static_cast<double>(e.frame_index))) << ',' << detail::fmt2(ep.py(e.error->symmetric))
         << ' ';
  os << "\"/>\n";
  for (const auto& e : trace.entries())
    if (e.status != FrameStatus::tracking)
      os << "<line x1=\"" << detail::fmt2(ep.px(static_cast<double>(e.frame_index))) << "\" y1=\"" << ep.y0
         << "\" x2=\"" << detail::fmt2(ep.px(static_cast<double>(e.frame_index))) << "\" y2=\"" << ep.y0 + ep.h
         << "\" stroke=\"#d62728\" stroke-opacity=\"0.3\"/>\n";

  // Chain overlay panel.
  const std::size_t idx = std::min(snapshot, trace.size() - 1);
  const auto& entry = trace.entries()[idx];
  const Points& est = entry.chain.nodes;
  const Points empty;
  const Points& gt = idx < truth.size() ? truth[idx] : empty;
  double lx = std::numeric_limits<double>::infinity(), hx = -lx, ly = lx, hy = -lx;
  auto extend = [&](const Points& p) {
    for (Eigen::Index i = 0; i < p.cols(); ++i) {
      lx = std::min(lx, p(0, i));
      hx = std::max(hx, p(0, i));
      ly = std::min(ly, p(1, i));
      hy = std::max(hy, p(1, i));
    }
  };
  extend(est);
  extend(gt);
  const double span = std::max(hx - lx, hy - ly);
  const double cx = 0.5 * (lx + hx), cy = 0.5 * (ly + hy);
  detail::Frame2d cp{W / 2 + 0.5 * pad, pad, W / 2 - 1.5 * pad, H - 2 * pad, cx - 0.55 * span, cx + 0.55 * span,
                     cy - 0.55 * span * (H - 2 * pad) / (W / 2 - 1.5 * pad), cy + 0.55 * span * (H - 2 * pad) / (W / 2 - 1.5 * pad)};
  os << "<text x=\"" << cp.x0 << "\" y=\"" << pad - 20 << "\">frame " << entry.frame_index
     << ": estimate (blue, hollow = occluded) vs truth (black)</text>\n";
  os << "<rect x=\"" << cp.x0 << "\" y=\"" << cp.y0 << "\" width=\"" << cp.w << "\" height=\"" << cp.h
     << "\" fill=\"none\" stroke=\"#888\"/>\n";
  auto polyline = [&](const Points& p, const char* color) {
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (Eigen::Index i = 0; i < p.cols(); ++i) os << detail::fmt2(cp.px(p(0, i))) << ',' << detail::fmt2(cp.py(p(1, i))) << ' ';
    os << "\"/>\n";
  };
  if (gt.cols() > 0) polyline(gt, "#000");
  polyline(est, "#1f77b4");
  for (Eigen::Index i = 0; i < est.cols(); ++i) {
    const bool vis = static_cast<std::size_t>(i) >= entry.mask.size() || entry.mask[static_cast<std::size_t>(i)];
    os << "<circle cx=\"" << detail::fmt2(cp.px(est(0, i))) << "\" cy=\"" << detail::fmt2(cp.py(est(1, i)))
       << "\" r=\"3.5\" stroke=\"#1f77b4\" fill=\"" << (vis ? "#1f77b4" : "white") << "\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

inline void write_svg(const std::string& path, const TrackTrace& trace, const std::vector<Points>& truth,
                      std::size_t snapshot) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  os << render_svg(trace, truth, snapshot);
}

}  // namespace dlotrack
