#pragma once

// Unidirectional position estimation of occluded nodes.
//
// Each occluded node m is estimated from the three chain-adjacent nodes on
// its supporting side (m-1, m-2, m-3 when support lies at lower indices,
// m+1, m+2, m+3 otherwise). Two estimates are blended:
//   - displacement: previous position plus a gamma-attenuated average of
//     the supports' frame-to-frame displacements;
//   - shape: the last supporting segment extended by b times the previous
//     gap, corrected by a times the previous-frame bending vector.
// An estimated node immediately becomes support for the next one.

#include "dlotrack/types.hpp"
#include "dlotrack/visibility.hpp"

#include <optional>

namespace dlotrack {

struct UpeParams {
  double gamma = 0.8;
  double a = 0.6;
  double b = 0.8;
  double alpha = 0.75;

  static UpeParams from(const TrackerConfig& cfg) { return {cfg.gamma, cfg.a, cfg.b, cfg.alpha}; }
};

inline constexpr std::size_t kSupportNodes = 3;

/// d1 is the displacement of the nearest support.
inline Vec local_displacement(const Vec& d1, const Vec& d2, const Vec& d3, double gamma) {
  const double g2 = gamma * gamma;
  return (d1 + gamma * d2 + g2 * d3) / (1.0 + gamma + g2);
}

inline Vec displacement_estimate(const Vec& prev_pos, const Vec& delta) { return prev_pos + delta; }

/// Extends the segment behind -> anchor past the anchor by b * prev_gap.
/// Falls back to `fallback_dir` when behind and anchor coincide, and to the
/// anchor itself when both directions are degenerate.
inline Vec proximal_constraint(const Vec& anchor, const Vec& behind, double prev_gap, double b,
                               const Vec& fallback_dir) {
  Vec dir = anchor - behind;
  double len = dir.norm();
  if (!(len > 0.0)) {
    dir = fallback_dir;
    len = dir.norm();
    if (!(len > 0.0)) return anchor;
  }
  return anchor + (b * prev_gap / len) * dir;
}

/// Bending vector from previous-frame positions of the nearest support, the
/// target node, and the second support.
inline Vec historical_curvature(const Vec& prev_near, const Vec& prev_target, const Vec& prev_far) {
  return (prev_near - prev_target) - (prev_far - prev_near);
}

inline Vec curvature_estimate(const Vec& proximal, const Vec& bend, double a) {
  return proximal + a * bend;
}

inline Vec blend(const Vec& from_displacement, const Vec& from_shape, double alpha) {
  return alpha * from_displacement + (1.0 - alpha) * from_shape;
}

/// Everything one frame of UPE reads.
struct UpeInputs {
  Points prev;               // all M nodes at t-1
  Points current;            // D x M; entries valid where `known` is true
  std::vector<bool> known;   // visible at t (or already estimated)
  UpeParams params;
};

enum class PassDirection {
  increasing,  // support at lower indices, estimate first..last
  decreasing   // support at higher indices, estimate last..first
};

/// True when the three nodes adjacent to `seg` on the given side exist and
/// are known.
inline bool has_support(const std::vector<bool>& known, const OcclusionSegment& seg,
                        PassDirection dir) {
  const std::size_t m = known.size();
  for (std::size_t k = 1; k <= kSupportNodes; ++k) {
    if (dir == PassDirection::increasing) {
      if (seg.first < k || !known[seg.first - k]) return false;
    } else {
      if (seg.last + k >= m || !known[seg.last + k]) return false;
    }
  }
  return true;
}

/// One calculation pass over `seg`. Returns D x seg.length() positions in
/// index order.
inline Points estimate_pass(const UpeInputs& in, const OcclusionSegment& seg, PassDirection dir) {
  const auto& p = in.params;
  Points work = in.current;
  const Eigen::Index len = static_cast<Eigen::Index>(seg.length());
  const Eigen::Index step = dir == PassDirection::increasing ? 1 : -1;
  // Offset k toward the support side of node m.
  auto toward = [step](Eigen::Index m, Eigen::Index k) { return m - step * k; };

  Eigen::Index m = dir == PassDirection::increasing ? static_cast<Eigen::Index>(seg.first)
                                                    : static_cast<Eigen::Index>(seg.last);
  for (Eigen::Index i = 0; i < len; ++i, m += step) {
    const Eigen::Index s1 = toward(m, 1), s2 = toward(m, 2), s3 = toward(m, 3);
    const Vec d1 = work.col(s1) - in.prev.col(s1);
    const Vec d2 = work.col(s2) - in.prev.col(s2);
    const Vec d3 = work.col(s3) - in.prev.col(s3);
    const Vec from_disp = displacement_estimate(in.prev.col(m), local_displacement(d1, d2, d3, p.gamma));

    const Vec prev_gap_vec = in.prev.col(m) - in.prev.col(s1);
    const Vec prox = proximal_constraint(work.col(s1), work.col(s2), prev_gap_vec.norm(), p.b, prev_gap_vec);
    const Vec bend = historical_curvature(in.prev.col(s1), in.prev.col(m), in.prev.col(s2));
    const Vec from_shape = curvature_estimate(prox, bend, p.a);

    work.col(m) = blend(from_disp, from_shape, p.alpha);
  }
  return work.middleCols(static_cast<Eigen::Index>(seg.first), len);
}

/// Estimates one occlusion segment. Tip segments, and mid segments with
/// support on one side only, use a single pass; mid segments with support on
/// both sides average the two passes.
inline Points estimate_segment(const UpeInputs& in, const OcclusionSegment& seg) {
  const bool inc = has_support(in.known, seg, PassDirection::increasing);
  const bool dec = has_support(in.known, seg, PassDirection::decreasing);
  if (inc && dec) {
    Points fwd = estimate_pass(in, seg, PassDirection::increasing);
    Points bwd = estimate_pass(in, seg, PassDirection::decreasing);
    return 0.5 * (fwd + bwd);
  }
  if (inc) return estimate_pass(in, seg, PassDirection::increasing);
  if (dec) return estimate_pass(in, seg, PassDirection::decreasing);
  throw Error("insufficient support");
}

struct UpeResult {
  Points positions;             // D x M
  std::vector<bool> resolved;   // known at t after estimation
};

/// Estimates every segment. Segments without direct visible support are
/// retried once their neighbours have been estimated; whatever remains
/// unsupported keeps its t-1 position and is reported unresolved.
inline UpeResult estimate_occluded(UpeInputs in, const std::vector<OcclusionSegment>& segments) {
  if (in.prev.cols() != in.current.cols() || in.known.size() != static_cast<std::size_t>(in.prev.cols()))
    throw Error("UPE inputs disagree on node count");
  std::vector<bool> done(segments.size(), false);
  bool progress = true;
  while (progress) {
    progress = false;
    std::vector<std::pair<std::size_t, Points>> round;
    for (std::size_t s = 0; s < segments.size(); ++s) {
      if (done[s]) continue;
      const auto& seg = segments[s];
      if (!has_support(in.known, seg, PassDirection::increasing) &&
          !has_support(in.known, seg, PassDirection::decreasing))
        continue;
      round.emplace_back(s, estimate_segment(in, seg));
    }
    // Segments of one round read only nodes known before the round.
    for (auto& [s, pos] : round) {
      const auto& seg = segments[s];
      in.current.middleCols(static_cast<Eigen::Index>(seg.first), pos.cols()) = pos;
      for (std::size_t i = seg.first; i <= seg.last; ++i) in.known[i] = true;
      done[s] = true;
      progress = true;
    }
  }
  for (std::size_t i = 0; i < in.known.size(); ++i)
    if (!in.known[i]) in.current.col(static_cast<Eigen::Index>(i)) = in.prev.col(static_cast<Eigen::Index>(i));
  return {std::move(in.current), std::move(in.known)};
}

}  // namespace dlotrack
