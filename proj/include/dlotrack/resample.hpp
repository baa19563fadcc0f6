#pragma once

// Redistributes chain nodes to equal geodesic (along-chain) spacing.

#include "dlotrack/types.hpp"

#include <vector>

namespace dlotrack {

struct GeodesicProfile {
  std::vector<double> cumulative;  // cumulative[j]: chain length from node 0 to node j
  double total = 0.0;
  double target_gap = 0.0;
};

inline GeodesicProfile geodesic_profile(const Points& chain) {
  const Eigen::Index m = chain.cols();
  if (m < 2) throw Error("chain needs at least 2 nodes");
  GeodesicProfile prof;
  prof.cumulative.resize(static_cast<std::size_t>(m), 0.0);
  for (Eigen::Index k = 1; k < m; ++k)
    prof.cumulative[static_cast<std::size_t>(k)] =
        prof.cumulative[static_cast<std::size_t>(k - 1)] + (chain.col(k - 1) - chain.col(k)).norm();
  prof.total = prof.cumulative.back();
  if (!(prof.total > 0.0)) throw Error("degenerate chain");
  prof.target_gap = prof.total / static_cast<double>(m - 1);
  return prof;
}

/// Node k of the output sits at arc length k * target_gap along the input.
/// Segment q is chosen so that cumulative[q] <= target < cumulative[q + 1];
/// zero-length segments never satisfy this and are skipped. The last node is
/// the last input node.
inline Points uniform_resample(const Points& chain, const GeodesicProfile& prof) {
  const Eigen::Index m = chain.cols();
  if (static_cast<std::size_t>(m) != prof.cumulative.size())
    throw Error("profile does not match chain");
  Points out(chain.rows(), m);
  out.col(0) = chain.col(0);
  std::size_t q = 0;
  const std::size_t last_seg = static_cast<std::size_t>(m - 2);
  for (Eigen::Index k = 1; k + 1 < m; ++k) {
    const double target = static_cast<double>(k) * prof.target_gap;
    while (q < last_seg && !(target < prof.cumulative[q + 1])) ++q;
    const auto qi = static_cast<Eigen::Index>(q);
    const Vec seg = chain.col(qi) - chain.col(qi + 1);
    const double seg_len = seg.norm();
    const double residual = target - prof.cumulative[q];
    out.col(k) = seg_len > 0.0 ? Vec(chain.col(qi) - (residual / seg_len) * seg) : Vec(chain.col(qi));
  }
  out.col(m - 1) = chain.col(m - 1);
  return out;
}

inline Points uniform_resample(const Points& chain) { return uniform_resample(chain, geodesic_profile(chain)); }

}  // namespace dlotrack
