#pragma once

#include "dlotrack/dataset.hpp"
#include "dlotrack/metrics.hpp"
#include "dlotrack/tracker.hpp"

#include <vector>

namespace dlotrack {

struct RunOptions {
  OcclusionMode mode = OcclusionMode::upe;
  bool record_timing = true;
};

/// Tracks a frame sequence. The session is initialised from the ground
/// truth of the first frame, and every frame (including the first) is
/// stepped. Frames carrying ground truth get a frame error. Stops after
/// the first failed frame.
inline TrackTrace track_sequence(const std::vector<FrameRecord>& frames, const TrackerConfig& cfg,
                                 const RunOptions& opts = {}) {
  TrackTrace trace;
  if (frames.empty()) return trace;
  const auto& first = frames.front();
  if (first.ground_truth.cols() == 0) throw Error("first frame has no ground truth for initialisation");
  auto session = TrackerSession::initialize(first.ground_truth, cfg, first.frame_index, opts.mode);
  for (const auto& rec : frames) {
    TraceEntry entry = session.step(rec.cloud);
    entry.frame_index = rec.frame_index;
    if (!opts.record_timing) entry.timings = {};
    if (rec.ground_truth.cols() >= 2 && entry.status != FrameStatus::failed)
      entry.error = frame_error(entry.chain.nodes, rec.ground_truth);
    const bool failed = entry.status == FrameStatus::failed;
    trace.append(std::move(entry));
    if (failed) break;
  }
  return trace;
}

}  // namespace dlotrack
