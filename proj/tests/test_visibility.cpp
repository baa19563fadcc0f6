#include "support.hpp"

#include <gtest/gtest.h>

using namespace dlotrack;
using testing_support::straight_chain;

TEST(Visibility, CountsPointsPerNode) {
  // 10 collinear nodes 10 apart; 5 samples near each of the first six.
  const Points chain = straight_chain(10, 10.0);
  Points cloud(2, 30);
  for (int node = 0; node < 6; ++node)
    for (int k = 0; k < 5; ++k) cloud.col(node * 5 + k) = chain.col(node) + Vec::Constant(2, 0.1 * k);
  const VisibilityMask mask = classify(NodeChain(chain), PointCloud(cloud), 2.0, 3);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(mask.flags[i], i < 6) << i;
  ASSERT_EQ(mask.segments.size(), 1u);
  EXPECT_EQ(mask.segments[0], (OcclusionSegment{6, 9, SegmentKind::tip}));
}

TEST(Visibility, NodesThemselvesRepeatedAreVisible) {
  const Points chain = straight_chain(6, 4.0, 3);
  Points cloud(3, 18);
  for (int r = 0; r < 3; ++r) cloud.middleCols(r * 6, 6) = chain;
  const VisibilityMask mask = classify(NodeChain(chain), PointCloud(cloud), 0.5, 3);
  EXPECT_TRUE(mask.all_visible());
}

TEST(Visibility, EmptyCloudOccludesEverything) {
  const VisibilityMask mask = classify(NodeChain(straight_chain(5, 1.0)), PointCloud(Points(2, 0)), 1.0, 1);
  EXPECT_TRUE(mask.all_occluded());
  EXPECT_EQ(mask.longest_visible_run(), 0u);
}

TEST(Visibility, RadiusIsStrict) {
  const Points chain = straight_chain(4, 10.0);
  const Points cloud = testing_support::pts({{0.0, 2.0}});
  EXPECT_FALSE(classify(NodeChain(chain), PointCloud(cloud), 2.0, 1).flags[0]);
  EXPECT_TRUE(classify(NodeChain(chain), PointCloud(cloud), 2.0 + 1e-9, 1).flags[0]);
}

TEST(Visibility, GridAgreesWithBruteForce) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-100.0, 100.0);
  for (int dim = 2; dim <= 3; ++dim) {
    for (int trial = 0; trial < 20; ++trial) {
      const Points chain = testing_support::random_chain(rng, 24, dim, 5.0, 15.0);
      Points cloud(dim, 2000);
      for (Eigen::Index i = 0; i < cloud.size(); ++i) cloud.data()[i] = u(rng);
      const double r = 5.0 + trial;
      const auto brute = classify(NodeChain(chain), PointCloud(cloud), r, 3, RadiusSearch::brute_force);
      const auto grid = classify(NodeChain(chain), PointCloud(cloud), r, 3, RadiusSearch::grid);
      EXPECT_EQ(brute.flags, grid.flags);
    }
  }
}

TEST(Visibility, DimensionMismatchThrows) {
  EXPECT_THROW(classify(NodeChain(straight_chain(4, 1.0, 3)), PointCloud(Points::Zero(2, 5)), 1.0, 1), Error);
}

TEST(Segments, KindsFollowTheChainEnds) {
  std::vector<bool> flags(24, true);
  EXPECT_TRUE(segment_occlusions(flags).empty());

  flags[0] = flags[1] = false;
  auto s = segment_occlusions(flags);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0], (OcclusionSegment{0, 1, SegmentKind::tip}));

  flags.assign(24, true);
  flags[4] = flags[5] = flags[6] = false;
  s = segment_occlusions(flags);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0], (OcclusionSegment{4, 6, SegmentKind::mid}));

  flags.assign(24, true);
  flags[2] = flags[23] = false;
  s = segment_occlusions(flags);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].kind, SegmentKind::mid);
  EXPECT_EQ(s[1], (OcclusionSegment{23, 23, SegmentKind::tip}));
}

TEST(Segments, LongestVisibleRun) {
  VisibilityMask m;
  m.flags = {true, true, false, true, true, true, false, true};
  m.segments = segment_occlusions(m.flags);
  EXPECT_EQ(m.longest_visible_run(), 3u);
  EXPECT_EQ(m.visible_count(), 6u);
}
