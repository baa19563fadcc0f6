#pragma once

// Node visibility from a radius count: node m is visible when at least
// v_lim cloud points lie strictly within r_vis of its previous position.

#include "dlotrack/types.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <vector>

namespace dlotrack {

enum class SegmentKind { tip, mid };

/// Maximal run of occluded node indices [first, last] (0-based, inclusive).
struct OcclusionSegment {
  std::size_t first = 0;
  std::size_t last = 0;
  SegmentKind kind = SegmentKind::mid;

  std::size_t length() const { return last - first + 1; }
  friend bool operator==(const OcclusionSegment&, const OcclusionSegment&) = default;
};

/// Splits the false entries of `flags` into maximal runs. A run touching
/// either end of the chain is a tip segment.
inline std::vector<OcclusionSegment> segment_occlusions(const std::vector<bool>& flags) {
  std::vector<OcclusionSegment> out;
  const std::size_t m = flags.size();
  std::size_t i = 0;
  while (i < m) {
    if (flags[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < m && !flags[j + 1]) ++j;
    SegmentKind kind = (i == 0 || j + 1 == m) ? SegmentKind::tip : SegmentKind::mid;
    out.push_back({i, j, kind});
    i = j + 1;
  }
  return out;
}

struct VisibilityMask {
  std::vector<bool> flags;
  std::vector<OcclusionSegment> segments;

  VisibilityMask() = default;
  explicit VisibilityMask(std::vector<bool> f)
      : flags(std::move(f)), segments(segment_occlusions(flags)) {}

  std::size_t visible_count() const {
    std::size_t n = 0;
    for (bool f : flags) n += f ? 1 : 0;
    return n;
  }
  bool all_visible() const { return segments.empty(); }
  bool all_occluded() const { return visible_count() == 0; }

  /// Longest run of consecutive visible nodes.
  std::size_t longest_visible_run() const {
    std::size_t best = 0, run = 0;
    for (bool f : flags) {
      run = f ? run + 1 : 0;
      best = std::max(best, run);
    }
    return best;
  }
};

namespace detail {

inline std::vector<bool> count_brute(const Points& nodes, const Points& cloud,
                                     double r_vis, int v_lim) {
  const double r2 = r_vis * r_vis;
  std::vector<bool> flags(static_cast<std::size_t>(nodes.cols()), false);
  for (Eigen::Index m = 0; m < nodes.cols(); ++m) {
    int q = 0;
    for (Eigen::Index n = 0; n < cloud.cols() && q < v_lim; ++n) {
      if ((cloud.col(n) - nodes.col(m)).squaredNorm() < r2) ++q;
    }
    flags[static_cast<std::size_t>(m)] = q >= v_lim;
  }
  return flags;
}

// Uniform hash grid with cell edge r_vis; a ball of radius r_vis around a
// node only touches the 3^D cells around the node's own cell.
class RadiusGrid {
 public:
  RadiusGrid(const Points& cloud, double cell) : cloud_(cloud), cell_(cell) {
    for (Eigen::Index n = 0; n < cloud.cols(); ++n) {
      cells_[cell_of(cloud.col(n))].push_back(n);
    }
  }

  int count_within(const Eigen::Ref<const Vec>& p, double r2, int limit) const {
    const auto c = cell_of(p);
    const int dim = static_cast<int>(cloud_.rows());
    int q = 0;
    std::array<std::int64_t, 3> off{};
    const int combos = dim == 2 ? 9 : 27;
    for (int k = 0; k < combos && q < limit; ++k) {
      int rem = k;
      for (int d = 0; d < dim; ++d) {
        off[static_cast<std::size_t>(d)] = c[static_cast<std::size_t>(d)] + (rem % 3) - 1;
        rem /= 3;
      }
      for (int d = dim; d < 3; ++d) off[static_cast<std::size_t>(d)] = 0;
      auto it = cells_.find(off);
      if (it == cells_.end()) continue;
      for (Eigen::Index n : it->second) {
        if ((cloud_.col(n) - p).squaredNorm() < r2 && ++q >= limit) break;
      }
    }
    return q;
  }

 private:
  std::array<std::int64_t, 3> cell_of(const Eigen::Ref<const Vec>& p) const {
    std::array<std::int64_t, 3> c{0, 0, 0};
    for (Eigen::Index d = 0; d < p.size(); ++d)
      c[static_cast<std::size_t>(d)] = static_cast<std::int64_t>(std::floor(p(d) / cell_));
    return c;
  }
  using Cell = std::array<std::int64_t, 3>;
  struct CellHash {
    std::size_t operator()(const Cell& c) const {
      std::uint64_t h = 1469598103934665603ull;
      for (auto v : c) h ^= static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
      return static_cast<std::size_t>(h);
    }
  };

  const Points& cloud_;
  double cell_;
  std::unordered_map<Cell, std::vector<Eigen::Index>, CellHash> cells_;
};

inline std::vector<bool> count_indexed(const Points& nodes, const Points& cloud,
                                       double r_vis, int v_lim) {
  RadiusGrid grid(cloud, r_vis);
  const double r2 = r_vis * r_vis;
  std::vector<bool> flags(static_cast<std::size_t>(nodes.cols()), false);
  for (Eigen::Index m = 0; m < nodes.cols(); ++m)
    flags[static_cast<std::size_t>(m)] = grid.count_within(nodes.col(m), r2, v_lim) >= v_lim;
  return flags;
}

}  // namespace detail

enum class RadiusSearch { automatic, brute_force, grid };

inline constexpr std::size_t kGridThreshold = 256;

/// Classifies each node of `prev_chain` against the current cloud.
inline VisibilityMask classify(const NodeChain& prev_chain, const PointCloud& cloud,
                               double r_vis, int v_lim,
                               RadiusSearch search = RadiusSearch::automatic) {
  if (!(r_vis > 0.0)) throw Error("r_vis must be > 0");
  if (v_lim < 1) throw Error("v_lim must be >= 1");
  if (cloud.empty()) return VisibilityMask(std::vector<bool>(prev_chain.size(), false));
  if (cloud.dim() != prev_chain.dim())
    throw Error("dimension mismatch between chain and cloud");

  bool use_grid = search == RadiusSearch::grid ||
                  (search == RadiusSearch::automatic && cloud.size() > kGridThreshold);
  return VisibilityMask(use_grid
                            ? detail::count_indexed(prev_chain.nodes, cloud.points, r_vis, v_lim)
                            : detail::count_brute(prev_chain.nodes, cloud.points, r_vis, v_lim));
}

}  // namespace dlotrack
