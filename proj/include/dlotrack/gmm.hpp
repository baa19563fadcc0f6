#pragma once

// EM registration of visible nodes to a point cloud. The mixture has one
// isotropic Gaussian per visible node (shared variance sigma2, weight
// (1 - omega) / M) plus a flat outlier component of weight omega whose
// density is 1 / N.

#include "dlotrack/parallel.hpp"
#include "dlotrack/types.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

namespace dlotrack {

inline constexpr double kSigma2Floor = 1e-10;

struct GmmState {
  Points means;  // D x M_vis
  double sigma2 = 1.0;
  double omega = 0.0;
  std::size_t n_points = 0;
  int iteration = 0;
  bool converged = false;

  Eigen::Index components() const { return means.cols(); }
};

/// Responsibilities of each Gaussian component (M_vis x N) and of the
/// outlier component (N).
struct Posterior {
  Eigen::MatrixXd resp;
  Eigen::VectorXd outlier;
};

namespace detail {

// log mu, the outlier term of the E-step denominator in log space.
inline double log_outlier_term(double sigma2, double omega, Eigen::Index dim,
                               Eigen::Index m_vis, std::size_t n) {
  if (omega <= 0.0) return -std::numeric_limits<double>::infinity();
  return 0.5 * static_cast<double>(dim) * std::log(2.0 * std::numbers::pi * sigma2) +
         std::log(omega) + std::log(static_cast<double>(m_vis)) - std::log1p(-omega) -
         std::log(static_cast<double>(n));
}

}  // namespace detail

inline void validate_gmm_state(const GmmState& state) {
  if (state.components() < 1) throw Error("mixture needs at least one component");
  if (!(state.sigma2 > 0.0) || !std::isfinite(state.sigma2)) throw Error("sigma2 must be > 0");
  if (!(state.omega >= 0.0 && state.omega < 1.0)) throw Error("omega out of [0,1)");
}

/// E-step. Every column is shifted by its largest log-term (including log mu)
/// before exponentiation; the shift cancels in the ratio.
inline Posterior e_step(const GmmState& state, const PointCloud& cloud) {
  validate_gmm_state(state);
  if (cloud.empty()) throw Error("no observations");
  if (cloud.dim() != state.means.rows()) throw Error("dimension mismatch between chain and cloud");

  const Eigen::Index m_vis = state.components();
  const Eigen::Index n_pts = cloud.points.cols();
  const double inv_two_sigma2 = 1.0 / (2.0 * state.sigma2);
  const double log_mu =
      detail::log_outlier_term(state.sigma2, state.omega, cloud.dim(), m_vis, cloud.size());

  Posterior post{Eigen::MatrixXd(m_vis, n_pts), Eigen::VectorXd(n_pts)};
  parallel_for(
      static_cast<std::size_t>(n_pts),
      [&](std::size_t idx) {
        const auto n = static_cast<Eigen::Index>(idx);
        auto col = post.resp.col(n);
        double shift = log_mu;
        for (Eigen::Index m = 0; m < m_vis; ++m) {
          col(m) = -(cloud.points.col(n) - state.means.col(m)).squaredNorm() * inv_two_sigma2;
          shift = std::max(shift, col(m));
        }
        double denom = 0.0;
        for (Eigen::Index m = 0; m < m_vis; ++m) {
          col(m) = std::exp(col(m) - shift);
          denom += col(m);
        }
        const double out = std::exp(log_mu - shift);
        denom += out;
        col /= denom;
        post.outlier(n) = out / denom;
      },
      4096);
  return post;
}

/// M-step: weighted centroids, then the variance about the new means.
/// Components with zero total responsibility keep their mean and are left
/// out of the variance update.
inline GmmState m_step(const Posterior& post, const PointCloud& cloud, const GmmState& state,
                       double sigma2_floor = kSigma2Floor) {
  const Eigen::Index m_vis = state.components();
  const Eigen::Index n_pts = cloud.points.cols();
  if (post.resp.rows() != m_vis || post.resp.cols() != n_pts)
    throw Error("posterior shape does not match state and cloud");

  GmmState next = state;
  Eigen::VectorXd weight = post.resp.rowwise().sum();
  std::vector<bool> active(static_cast<std::size_t>(m_vis), false);
  for (Eigen::Index m = 0; m < m_vis; ++m) {
    if (!(weight(m) > 0.0)) continue;
    Vec acc = Vec::Zero(cloud.dim());
    for (Eigen::Index n = 0; n < n_pts; ++n) acc += post.resp(m, n) * cloud.points.col(n);
    Vec mean = acc / weight(m);
    if (!mean.allFinite()) continue;
    next.means.col(m) = mean;
    active[static_cast<std::size_t>(m)] = true;
  }

  double num = 0.0;
  double den = 0.0;
  for (Eigen::Index m = 0; m < m_vis; ++m) {
    if (!active[static_cast<std::size_t>(m)]) continue;
    for (Eigen::Index n = 0; n < n_pts; ++n)
      num += post.resp(m, n) * (cloud.points.col(n) - next.means.col(m)).squaredNorm();
    den += weight(m);
  }
  if (den > 0.0) next.sigma2 = std::max(num / (static_cast<double>(cloud.dim()) * den), sigma2_floor);
  next.n_points = cloud.size();
  next.iteration = state.iteration + 1;
  return next;
}

/// Log-likelihood of the cloud under the full mixture.
inline double log_likelihood(const GmmState& state, const PointCloud& cloud) {
  const Eigen::Index m_vis = state.components();
  const double dim = static_cast<double>(cloud.dim());
  const double log_gauss_w = std::log1p(-state.omega) - std::log(static_cast<double>(m_vis)) -
                             0.5 * dim * std::log(2.0 * std::numbers::pi * state.sigma2);
  const double log_out = state.omega > 0.0
                             ? std::log(state.omega) - std::log(static_cast<double>(cloud.size()))
                             : -std::numeric_limits<double>::infinity();
  double total = 0.0;
  Eigen::VectorXd terms(m_vis + 1);
  for (Eigen::Index n = 0; n < cloud.points.cols(); ++n) {
    for (Eigen::Index m = 0; m < m_vis; ++m)
      terms(m) = log_gauss_w -
                 (cloud.points.col(n) - state.means.col(m)).squaredNorm() / (2.0 * state.sigma2);
    terms(m_vis) = log_out;
    const double top = terms.maxCoeff();
    total += top + std::log((terms.array() - top).exp().sum());
  }
  return total;
}

/// Expected complete-data objective restricted to the Gaussian components,
/// with terms independent of (means, sigma2) dropped.
inline double expected_objective(const Posterior& post, const PointCloud& cloud, const Points& means,
                            double sigma2) {
  const double dim = static_cast<double>(cloud.dim());
  double q = 0.0;
  for (Eigen::Index n = 0; n < cloud.points.cols(); ++n)
    for (Eigen::Index m = 0; m < means.cols(); ++m)
      q += post.resp(m, n) * (-0.5 * dim * std::log(sigma2) -
                              (cloud.points.col(n) - means.col(m)).squaredNorm() / (2.0 * sigma2));
  return q;
}

/// Per-frame variance initialisation from the squared distance of every
/// point to its nearest node, per dimension. Averaging over all node/point
/// pairs instead makes sigma2 comparable to the squared rope length, and the
/// first M-step then pulls every mean to the cloud centroid.
inline double initial_sigma2(const Points& means, const PointCloud& cloud) {
  double acc = 0.0;
  for (Eigen::Index n = 0; n < cloud.points.cols(); ++n) {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index m = 0; m < means.cols(); ++m)
      best = std::min(best, (cloud.points.col(n) - means.col(m)).squaredNorm());
    acc += best;
  }
  return acc / (static_cast<double>(cloud.dim()) * static_cast<double>(cloud.size()));
}

struct Registration {
  Points positions;
  GmmState state;  // in normalised coordinates, see Normalization
  int iterations = 0;
};

/// Similarity that maps the cloud to zero mean and unit RMS radius. EM runs
/// in these coordinates: the outlier density 1/N is not a length density,
/// so without it the balance between Gaussian and outlier terms would
/// depend on the length unit of the input.
struct Normalization {
  Vec center;
  double scale = 1.0;

  static Normalization of(const PointCloud& cloud) {
    Normalization t;
    t.center = cloud.points.rowwise().mean();
    const double ms = (cloud.points.colwise() - t.center).colwise().squaredNorm().mean();
    t.scale = ms > 0.0 && std::isfinite(ms) ? std::sqrt(ms) : 1.0;
    return t;
  }
  Points apply(const Points& p) const { return (p.colwise() - center) / scale; }
  Points invert(const Points& p) const { return (p * scale).colwise() + center; }
};

using EmObserver = std::function<void(const GmmState&, const PointCloud&)>;

/// Runs EM from `init_nodes` until the relative change of sigma2 drops below
/// cfg.em_tol or cfg.em_max_iters is reached. The observer, when set, sees
/// the normalised cloud with the initial state and with the state after
/// every M-step.
inline Registration register_nodes(const Points& init_nodes, const PointCloud& cloud,
                                   const TrackerConfig& cfg, const EmObserver& observer = {}) {
  if (init_nodes.cols() < 1) throw Error("no visible nodes to register");
  if (cloud.empty()) throw Error("no observations");
  if (cloud.dim() != init_nodes.rows()) throw Error("dimension mismatch between chain and cloud");

  const Normalization norm = Normalization::of(cloud);
  const PointCloud unit_cloud(norm.apply(cloud.points));
  const double floor = kSigma2Floor / (norm.scale * norm.scale);

  GmmState state;
  state.means = norm.apply(init_nodes);
  state.omega = cfg.omega;
  state.n_points = cloud.size();
  state.sigma2 = std::max(initial_sigma2(state.means, unit_cloud), floor);
  if (observer) observer(state, unit_cloud);

  while (state.iteration < cfg.em_max_iters) {
    const double prev_sigma2 = state.sigma2;
    state = m_step(e_step(state, unit_cloud), unit_cloud, state, floor);
    if (observer) observer(state, unit_cloud);
    if (std::abs(state.sigma2 - prev_sigma2) / prev_sigma2 < cfg.em_tol) {
      state.converged = true;
      break;
    }
  }
  return {norm.invert(state.means), state, state.iteration};
}

}  // namespace dlotrack
