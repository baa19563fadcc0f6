#include "support.hpp"

#include <gtest/gtest.h>

using namespace dlotrack;
using testing_support::straight_chain;

namespace {

Points densify(const Points& chain, int per_segment) {
  Points out(chain.rows(), (chain.cols() - 1) * per_segment + 1);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i + 1 < chain.cols(); ++i)
    for (int s = 0; s < per_segment; ++s)
      out.col(k++) = chain.col(i) + (static_cast<double>(s) / per_segment) * (chain.col(i + 1) - chain.col(i));
  out.col(k) = chain.col(chain.cols() - 1);
  return out;
}

}  // namespace

TEST(Session, InitialisesFromAResampledChain) {
  Points c = straight_chain(24, 10.0);
  EXPECT_LT((TrackerSession::initialize(c, TrackerConfig{}).chain().nodes - c).cwiseAbs().maxCoeff(), 1e-12);
  for (int i = 0; i < 24; ++i) c(0, i) = i * i;
  const auto s = TrackerSession::initialize(c, TrackerConfig{});
  EXPECT_EQ(s.chain().nodes, uniform_resample(c));
}

TEST(Session, RejectsNodeCountMismatch) {
  EXPECT_THROW(TrackerSession::initialize(straight_chain(20, 1.0), TrackerConfig{}), Error);
}

TEST(Session, StaticDenseCloudStaysOnTheCurve) {
  const Points truth = straight_chain(24, 34.78, 3);
  auto session = TrackerSession::initialize(truth, TrackerConfig{});
  const PointCloud cloud(densify(truth, 35));
  for (int f = 0; f < 30; ++f) {
    const TraceEntry e = session.step(cloud);
    ASSERT_EQ(e.status, FrameStatus::tracking);
    EXPECT_LE(frame_error(e.chain.nodes, truth).symmetric, 0.5 * 34.78 * 0.1);
  }
}

TEST(Session, EmptyCloudCoasts) {
  const Points truth = straight_chain(24, 10.0);
  auto session = TrackerSession::initialize(truth, TrackerConfig{});
  const TraceEntry e = session.step(PointCloud(Points(2, 0)));
  EXPECT_EQ(e.status, FrameStatus::coasting);
  EXPECT_EQ(e.chain.nodes, session.chain().nodes);
  EXPECT_LT((e.chain.nodes - truth).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Session, NonFiniteCloudFailsTheSession) {
  auto session = TrackerSession::initialize(straight_chain(24, 10.0), TrackerConfig{});
  Points bad = straight_chain(24, 10.0);
  bad(0, 3) = std::nan("");
  const TraceEntry e = session.step(PointCloud(bad));
  EXPECT_EQ(e.status, FrameStatus::failed);
  EXPECT_FALSE(e.diagnostic.empty());
  EXPECT_THROW(session.step(PointCloud(straight_chain(24, 10.0))), Error);
}

TEST(Session, RigidTipOcclusionBeforeResampling) {
  // Nodes 20..23 lose their points; the rest translate sideways. EM pulls
  // the last visible node toward the interior of its points, which shifts
  // the estimates along the rope, but with b = 1 they stay on the
  // translated line.
  TrackerConfig cfg;
  cfg.b = 1.0;
  const double gap = 34.78;
  const Points truth = straight_chain(24, gap);
  auto session = TrackerSession::initialize(truth, cfg);
  const Points moved = truth.colwise() + testing_support::vec({0.0, 1.5});
  Points visible_part = moved.leftCols(20);
  visible_part(0, 19) += 14.0;  // stop short of r_vis from node 20
  const TraceEntry e = session.step(PointCloud(densify(visible_part, 35)));
  ASSERT_EQ(e.status, FrameStatus::tracking);
  for (int i = 0; i < 24; ++i) EXPECT_EQ(e.mask[i], i < 20) << i;
  for (int i = 20; i < 24; ++i) {
    EXPECT_NEAR(e.pre_resample(1, i), 1.5, 1e-9) << i;
    EXPECT_NEAR(e.pre_resample(0, i) - e.pre_resample(0, i - 1), gap, 0.1 * gap) << i;
  }
}

TEST(Session, FreezeModeHoldsOccludedNodes) {
  const Points truth = straight_chain(24, 34.78);
  auto session = TrackerSession::initialize(truth, TrackerConfig{}, 0, OcclusionMode::freeze);
  const Points moved = truth.colwise() + testing_support::vec({0.0, 3.0});
  const TraceEntry e = session.step(PointCloud(densify(moved.leftCols(20), 35)));
  for (int i = 20; i < 24; ++i) EXPECT_EQ(e.pre_resample.col(i), truth.col(i));
}

TEST(Pipeline, TracksThePresetsWithoutFailures) {
  for (const auto& sc : builtin_scenarios()) {
    Scenario small = sc;
    small.duration = std::min<std::size_t>(sc.duration, 100);
    const auto frames = generate(small);
    const TrackTrace trace = track_sequence(frames, TrackerConfig{});
    EXPECT_EQ(trace.size(), frames.size()) << sc.name;
    for (const auto& e : trace.entries()) EXPECT_NE(e.status, FrameStatus::failed) << sc.name;
  }
}

TEST(Pipeline, FullDropoutCoastsAndRecovers) {
  const auto frames = generate(builtin_scenario("full_dropout"));
  const TrackTrace trace = track_sequence(frames, TrackerConfig{});
  ASSERT_EQ(trace.size(), frames.size());
  EXPECT_EQ(trace.entries()[85].status, FrameStatus::coasting);
  EXPECT_EQ(trace.entries().back().status, FrameStatus::tracking);
  EXPECT_LT(trace.entries().back().error->symmetric, 3.0);
}

TEST(Pipeline, RunsAreDeterministic) {
  Scenario sc = builtin_scenario("tip_occlusion");
  const auto frames = generate(sc);
  RunOptions opts;
  opts.record_timing = false;
  const TrackTrace a = track_sequence(frames, TrackerConfig{}, opts);
  const TrackTrace b = track_sequence(frames, TrackerConfig{}, opts);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a.entries()[i].chain.nodes, b.entries()[i].chain.nodes);
}
