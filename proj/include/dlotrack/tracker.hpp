#pragma once

// Per-frame pipeline: visibility -> EM on visible nodes -> occluded-node
// estimation -> geodesic resampling.

#include "dlotrack/gmm.hpp"
#include "dlotrack/resample.hpp"
#include "dlotrack/types.hpp"
#include "dlotrack/upe.hpp"
#include "dlotrack/visibility.hpp"

#include <chrono>
#include <string>

namespace dlotrack {

/// How occluded nodes are filled in. `freeze` keeps them at their t-1
/// position and exists for ablation runs.
enum class OcclusionMode { upe, freeze };

class TrackerSession {
 public:
  /// Starts a session from ground-truth nodes of an unoccluded frame. The
  /// stored chain is their uniform resampling.
  static TrackerSession initialize(const Points& nodes, const TrackerConfig& cfg,
                                   std::size_t first_frame = 0,
                                   OcclusionMode mode = OcclusionMode::upe) {
    validate_config(cfg);
    if (nodes.cols() != cfg.node_count)
      throw Error("initial chain has " + std::to_string(nodes.cols()) + " nodes, config expects " +
                  std::to_string(cfg.node_count));
    NodeChain chain(uniform_resample(nodes));
    validate_chain(chain);
    return TrackerSession(cfg, std::move(chain), first_frame, mode);
  }

  const TrackerConfig& config() const { return cfg_; }
  const NodeChain& chain() const { return chain_; }
  const NodeChain& prev_chain() const { return prev_; }
  std::size_t frame_index() const { return next_frame_; }
  FrameStatus status() const { return status_; }
  OcclusionMode occlusion_mode() const { return mode_; }

  /// Processes one frame. Frames that cannot be tracked (no observations,
  /// fewer than three consecutive visible nodes) carry the chain forward and
  /// are reported as coasting; non-finite results fail the session.
  TraceEntry step(const PointCloud& cloud) {
    if (status_ == FrameStatus::failed) throw Error("session has failed: " + diagnostic_);
    if (!cloud.empty() && cloud.dim() != chain_.dim())
      throw Error("dimension mismatch between chain and cloud");

    using clock = std::chrono::steady_clock;
    auto seconds = [](clock::time_point a, clock::time_point b) {
      return std::chrono::duration<double>(b - a).count();
    };

    TraceEntry entry;
    entry.frame_index = next_frame_++;

    if (!all_finite(cloud.points)) return fail(std::move(entry), "cloud has non-finite coordinates");

    auto t0 = clock::now();
    VisibilityMask mask = classify(chain_, cloud, cfg_.r_vis, cfg_.v_lim);
    auto t1 = clock::now();
    entry.timings.visibility = seconds(t0, t1);
    entry.mask = mask.flags;

    if (mask.longest_visible_run() < kSupportNodes) {
      entry.status = FrameStatus::coasting;
      entry.diagnostic = mask.all_occluded() ? "fully occluded" : "fewer than 3 consecutive visible nodes";
      entry.chain = chain_;
      entry.pre_resample = chain_.nodes;
      status_ = FrameStatus::coasting;
      return entry;
    }

    const Eigen::Index m = chain_.nodes.cols();
    std::vector<Eigen::Index> vis_idx;
    for (Eigen::Index k = 0; k < m; ++k)
      if (mask.flags[static_cast<std::size_t>(k)]) vis_idx.push_back(k);
    Points init(chain_.dim(), static_cast<Eigen::Index>(vis_idx.size()));
    for (std::size_t i = 0; i < vis_idx.size(); ++i)
      init.col(static_cast<Eigen::Index>(i)) = chain_.nodes.col(vis_idx[i]);

    auto t2 = clock::now();
    Registration reg = register_nodes(init, cloud, cfg_);
    auto t3 = clock::now();
    entry.timings.em = seconds(t2, t3);
    entry.em_iterations = reg.iterations;

    Points merged = chain_.nodes;
    for (std::size_t i = 0; i < vis_idx.size(); ++i)
      merged.col(vis_idx[i]) = reg.positions.col(static_cast<Eigen::Index>(i));

    auto t4 = clock::now();
    std::size_t unresolved = 0;
    if (mode_ == OcclusionMode::upe && !mask.all_visible()) {
      UpeResult upe = estimate_occluded({chain_.nodes, merged, mask.flags, UpeParams::from(cfg_)},
                                        mask.segments);
      merged = std::move(upe.positions);
      for (bool r : upe.resolved) unresolved += r ? 0 : 1;
    }
    auto t5 = clock::now();
    entry.timings.upe = seconds(t4, t5);
    entry.pre_resample = merged;
    if (unresolved > 0)
      entry.diagnostic = std::to_string(unresolved) + " occluded nodes without support held at t-1";

    if (!all_finite(merged)) return fail(std::move(entry), "non-finite node estimate");

    auto t6 = clock::now();
    Points resampled;
    try {
      resampled = uniform_resample(merged);
    } catch (const Error& e) {
      return fail(std::move(entry), e.what());
    }
    auto t7 = clock::now();
    entry.timings.resample = seconds(t6, t7);
    if (!all_finite(resampled)) return fail(std::move(entry), "non-finite resampled chain");

    prev_ = chain_;
    chain_ = NodeChain(std::move(resampled), mask.flags);
    status_ = FrameStatus::tracking;
    entry.chain = chain_;
    entry.status = status_;
    return entry;
  }

 private:
  TrackerSession(TrackerConfig cfg, NodeChain chain, std::size_t first_frame, OcclusionMode mode)
      : cfg_(cfg), chain_(chain), prev_(std::move(chain)), next_frame_(first_frame), mode_(mode) {}

  TraceEntry fail(TraceEntry entry, std::string why) {
    status_ = FrameStatus::failed;
    diagnostic_ = why;
    entry.status = FrameStatus::failed;
    entry.diagnostic = std::move(why);
    entry.chain = chain_;
    if (entry.pre_resample.size() == 0) entry.pre_resample = chain_.nodes;
    return entry;
  }

  TrackerConfig cfg_;
  NodeChain chain_;
  NodeChain prev_;
  std::size_t next_frame_ = 0;
  FrameStatus status_ = FrameStatus::tracking;
  OcclusionMode mode_ = OcclusionMode::upe;
  std::string diagnostic_;
};

}  // namespace dlotrack
