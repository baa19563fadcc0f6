#include "support.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace dlotrack;
using testing_support::pts;

namespace {

GmmState state_of(const Points& means, double sigma2, double omega, std::size_t n) {
  GmmState s;
  s.means = means;
  s.sigma2 = sigma2;
  s.omega = omega;
  s.n_points = n;
  return s;
}

// Distance from p to the segment, sampled densely.
double dense_distance(const Points& line, const Vec& p) {
  double best = INFINITY;
  for (Eigen::Index i = 0; i + 1 < line.cols(); ++i)
    for (int k = 0; k <= 1000; ++k) {
      const double t = k / 1000.0;
      best = std::min(best, ((1 - t) * line.col(i) + t * line.col(i + 1) - p).norm());
    }
  return best;
}

}  // namespace

TEST(EStep, SingleComponentWithOutlierWeight) {
  const double sigma = 0.7;
  const Points means = pts({{0.0, 0.0}});
  const PointCloud cloud(pts({{sigma * std::sqrt(2.0), 0.0}}));
  const Posterior post = e_step(state_of(means, sigma * sigma, 0.5, 1), cloud);
  // Hand evaluation: exp(-1) / (exp(-1) + 2 pi sigma^2 * 0.5*1 / (0.5*1)).
  const long double s2 = static_cast<long double>(sigma) * sigma;
  const long double e = std::exp(-1.0L);
  const long double expected = e / (e + 2.0L * std::numbers::pi_v<long double> * s2);
  EXPECT_NEAR(post.resp(0, 0), static_cast<double>(expected), 1e-15);
  EXPECT_NEAR(post.outlier(0), static_cast<double>(1.0L - expected), 1e-15);
}

TEST(EStep, NoOutliersSingleNodeTakesEverything) {
  const PointCloud cloud(pts({{5.0, 1.0}, {-30.0, 2.0}, {0.0, 0.0}}));
  const Posterior post = e_step(state_of(pts({{0.0, 0.0}}), 1.0, 0.0, 3), cloud);
  for (int n = 0; n < 3; ++n) EXPECT_DOUBLE_EQ(post.resp(0, n), 1.0);
}

TEST(EStep, EquidistantNodesSplitEvenly) {
  const PointCloud cloud(pts({{0.0, 1.0}}));
  const Posterior post = e_step(state_of(pts({{-1.0, 0.0}, {1.0, 0.0}}), 0.5, 0.0, 1), cloud);
  EXPECT_DOUBLE_EQ(post.resp(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(post.resp(1, 0), 0.5);
}

TEST(EStep, FarPointsStayNormalised) {
  // Exponents far below the double range must not turn into 0/0.
  const PointCloud cloud(pts({{1e6, 1e6}, {0.0, 0.0}}));
  const Posterior post = e_step(state_of(pts({{0.0, 0.0}, {1.0, 0.0}}), 1e-4, 0.0, 2), cloud);
  for (int n = 0; n < 2; ++n) {
    EXPECT_TRUE(std::isfinite(post.resp(0, n)));
    EXPECT_NEAR(post.resp.col(n).sum() + post.outlier(n), 1.0, 1e-12);
  }
}

TEST(EStep, EmptyCloudThrows) {
  EXPECT_THROW(e_step(state_of(pts({{0.0, 0.0}}), 1.0, 0.1, 0), PointCloud(Points(2, 0))), Error);
}

TEST(MStep, CentroidOfResponsibilities) {
  Posterior post;
  post.resp = Eigen::MatrixXd::Ones(1, 2);
  post.outlier = Eigen::VectorXd::Zero(2);
  const PointCloud cloud(pts({{0.0, 0.0}, {2.0, 0.0}}));
  const GmmState next = m_step(post, cloud, state_of(pts({{5.0, 5.0}}), 1.0, 0.0, 2));
  EXPECT_DOUBLE_EQ(next.means(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(next.means(1, 0), 0.0);
  EXPECT_DOUBLE_EQ(next.sigma2, 0.5);  // (1 + 1) / (D * 2)
}

TEST(MStep, ZeroResidualHitsTheFloor) {
  const Points means = pts({{0.0, 0.0}, {10.0, 0.0}});
  const PointCloud cloud(means);
  Posterior post;
  post.resp = Eigen::MatrixXd::Identity(2, 2);
  post.outlier = Eigen::VectorXd::Zero(2);
  EXPECT_DOUBLE_EQ(m_step(post, cloud, state_of(means, 1.0, 0.0, 2)).sigma2, kSigma2Floor);
}

TEST(MStep, DoesNotDecreaseTheObjective) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const Points means = testing_support::random_chain(rng, 5, 2, 1.0, 3.0);
    Points cloud(2, 40);
    for (Eigen::Index i = 0; i < cloud.size(); ++i) cloud.data()[i] = 3.0 * g(rng);
    const GmmState s = state_of(means, 2.0, 0.1, 40);
    const Posterior post = e_step(s, PointCloud(cloud));
    const GmmState next = m_step(post, PointCloud(cloud), s);
    EXPECT_GE(expected_objective(post, PointCloud(cloud), next.means, next.sigma2),
              expected_objective(post, PointCloud(cloud), means, next.sigma2) - 1e-9);
  }
}

TEST(Register, FixedPointWhenCloudIsTheNodes) {
  const Points nodes = testing_support::straight_chain(8, 3.0);
  const Registration reg = register_nodes(nodes, PointCloud(nodes), TrackerConfig{});
  EXPECT_LT((reg.positions - nodes).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Register, FollowsATranslatedLine) {
  const Points init = testing_support::straight_chain(10, 1.0);
  Points dense(2, 901);
  for (int k = 0; k <= 900; ++k) dense.col(k) = testing_support::vec({1.0 + k / 100.0, 0.0});
  const Points line = pts({{1.0, 0.0}, {10.0, 0.0}});
  const Registration reg = register_nodes(init, PointCloud(dense), TrackerConfig{});
  for (int i = 0; i < 10; ++i) EXPECT_LT(dense_distance(line, reg.positions.col(i)), 0.1) << i;
}

TEST(Register, OutliersAreAbsorbed) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-2.0, 13.0);
  const Points init = testing_support::straight_chain(10, 1.0);
  Points cloud(2, 1001);
  for (int k = 0; k <= 900; ++k) cloud.col(k) = testing_support::vec({1.0 + k / 100.0, 0.0});
  for (int k = 901; k <= 1000; ++k) cloud.col(k) = testing_support::vec({u(rng), u(rng) - 5.5});
  TrackerConfig cfg;
  cfg.omega = 0.1;
  const Registration reg = register_nodes(init, PointCloud(cloud), cfg);
  const Points line = pts({{1.0, 0.0}, {10.0, 0.0}});
  for (int i = 0; i < 10; ++i) EXPECT_LT(dense_distance(line, reg.positions.col(i)), 0.2) << i;
}

TEST(Register, LikelihoodNeverDecreases) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  const Points truth = testing_support::random_chain(rng, 12, 3, 10.0, 20.0);
  Points cloud(3, 300);
  for (int k = 0; k < 300; ++k) {
    const int a = k % 11;
    const double t = (k % 7) / 7.0;
    cloud.col(k) = (1 - t) * truth.col(a) + t * truth.col(a + 1);
    for (int d = 0; d < 3; ++d) cloud(d, k) += g(rng);
  }
  Points init = truth;
  for (Eigen::Index i = 0; i < init.size(); ++i) init.data()[i] += 4.0 * g(rng);
  std::vector<double> ll;
  register_nodes(init, PointCloud(cloud), TrackerConfig{},
                 [&](const GmmState& s, const PointCloud& c) { ll.push_back(log_likelihood(s, c)); });
  ASSERT_GE(ll.size(), 2u);
  for (std::size_t i = 1; i < ll.size(); ++i) EXPECT_GE(ll[i], ll[i - 1] - 1e-8);
}

TEST(Register, TranslationEquivariant) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g(0.0, 1.0);
  const Points truth = testing_support::random_chain(rng, 10, 2, 10.0, 20.0);
  Points cloud(2, 200);
  for (int k = 0; k < 200; ++k) cloud.col(k) = truth.col(k % 10) + testing_support::vec({g(rng), g(rng)});
  const Vec shift = testing_support::vec({250.0, -75.0});
  const Registration a = register_nodes(truth, PointCloud(cloud), TrackerConfig{});
  const Registration b =
      register_nodes(truth.colwise() + shift, PointCloud(cloud.colwise() + shift), TrackerConfig{});
  EXPECT_LT(((b.positions.colwise() - shift) - a.positions).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Register, CloudOrderDoesNotMatter) {
  std::mt19937_64 rng(10);
  std::normal_distribution<double> g(0.0, 1.0);
  const Points truth = testing_support::random_chain(rng, 10, 3, 10.0, 20.0);
  Points cloud(3, 150);
  for (int k = 0; k < 150; ++k) cloud.col(k) = truth.col(k % 10) + testing_support::vec({g(rng), g(rng), g(rng)});
  std::vector<Eigen::Index> order(150);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  const Points shuffled = cloud(Eigen::all, order);
  const Registration a = register_nodes(truth, PointCloud(cloud), TrackerConfig{});
  const Registration b = register_nodes(truth, PointCloud(shuffled), TrackerConfig{});
  EXPECT_LT((a.positions - b.positions).cwiseAbs().maxCoeff(), 1e-9);
}
