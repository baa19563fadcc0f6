#pragma once

// Tracking error against ground truth, measured as point-to-polyline
// distances in both directions, plus per-run aggregation.

#include "dlotrack/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace dlotrack {

inline double point_to_segment(const Vec& p, const Vec& s0, const Vec& s1) {
  const Vec d = s1 - s0;
  const double len2 = d.squaredNorm();
  if (!(len2 > 0.0)) return (p - s0).norm();
  const double t = std::clamp((p - s0).dot(d) / len2, 0.0, 1.0);
  return (p - (s0 + t * d)).norm();
}

/// Distance from p to the piecewise-linear curve through `chain`.
inline double point_to_pwl(const Vec& p, const Points& chain) {
  if (chain.cols() < 2) throw Error("polyline needs at least 2 nodes");
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k + 1 < chain.cols(); ++k)
    best = std::min(best, point_to_segment(p, chain.col(k), chain.col(k + 1)));
  return best;
}

/// Mean distance of the estimated nodes to PWL(truth).
inline double per_node_error(const Points& est, const Points& truth) {
  if (est.cols() == 0) throw Error("estimate has no nodes");
  if (est.rows() != truth.rows()) throw Error("dimension mismatch between chains");
  double sum = 0.0;
  for (Eigen::Index k = 0; k < est.cols(); ++k) sum += point_to_pwl(est.col(k), truth);
  return sum / static_cast<double>(est.cols());
}

inline FrameError frame_error(const Points& est, const Points& truth) {
  FrameError e;
  e.forward = per_node_error(est, truth);
  e.backward = per_node_error(truth, est);
  e.symmetric = 0.5 * (e.forward + e.backward);
  return e;
}

/// Linear interpolation between order statistics at rank p * (n - 1),
/// p in [0, 1].
inline double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw Error("percentile of empty sequence");
  if (!(p >= 0.0 && p <= 1.0)) throw Error("percentile fraction out of [0,1]");
  std::sort(values.begin(), values.end());
  const double rank = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = rank - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
};

inline MeanStd mean_std(const std::vector<double>& v) {
  MeanStd r;
  if (v.empty()) return r;
  for (double x : v) r.mean += x;
  r.mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - r.mean) * (x - r.mean);
  r.std = std::sqrt(ss / static_cast<double>(v.size()));
  return r;
}

struct TraceSummary {
  std::size_t frames = 0;
  std::size_t evaluated_frames = 0;
  std::size_t warmup = 0;
  std::size_t coasting_frames = 0;
  std::size_t failed_frames = 0;
  double mean_error = 0.0;
  double q1_error = 0.0;
  double median_error = 0.0;
  double q3_error = 0.0;
  double max_error = 0.0;
  MeanStd visibility, em, upe, resample, total;  // seconds per frame
};

inline constexpr std::size_t kDefaultWarmup = 120;

/// Aggregates frames with index >= warmup. Frames without a ground-truth
/// error still contribute timings.
inline TraceSummary aggregate(const TrackTrace& trace, std::size_t warmup = kDefaultWarmup) {
  if (trace.empty()) throw Error("empty trace");
  TraceSummary s;
  s.frames = trace.size();
  s.warmup = warmup;
  std::vector<double> errors, tv, te, tu, tr, tt;
  for (const auto& e : trace.entries()) {
    if (e.status == FrameStatus::coasting) ++s.coasting_frames;
    if (e.status == FrameStatus::failed) ++s.failed_frames;
    if (e.frame_index < warmup) continue;
    if (e.error) errors.push_back(e.error->symmetric);
    tv.push_back(e.timings.visibility);
    te.push_back(e.timings.em);
    tu.push_back(e.timings.upe);
    tr.push_back(e.timings.resample);
    tt.push_back(e.timings.total());
  }
  if (tt.empty()) throw Error("no frames after warm-up window");
  s.evaluated_frames = errors.size();
  if (!errors.empty()) {
    s.mean_error = mean_std(errors).mean;
    s.q1_error = percentile(errors, 0.25);
    s.median_error = percentile(errors, 0.5);
    s.q3_error = percentile(errors, 0.75);
    s.max_error = *std::max_element(errors.begin(), errors.end());
  }
  s.visibility = mean_std(tv);
  s.em = mean_std(te);
  s.upe = mean_std(tu);
  s.resample = mean_std(tr);
  s.total = mean_std(tt);
  return s;
}

}  // namespace dlotrack
