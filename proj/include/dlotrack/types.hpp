#pragma once

// Core value types shared by every stage of the tracker.
//
// Point sets are stored column-wise: a D x K matrix holds K points of
// dimension D, so `pts.col(k)` is a contiguous position vector. D is a
// runtime quantity (2 or 3) fixed for one tracking session.

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dlotrack {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Vec = Eigen::VectorXd;
using Points = Eigen::MatrixXd;  // D x K, one point per column

inline constexpr std::size_t kMinNodes = 4;

inline bool valid_dim(Eigen::Index d) { return d == 2 || d == 3; }

inline bool all_finite(const Eigen::Ref<const Eigen::MatrixXd>& m) {
  return m.allFinite();
}

/// Ordered DLO state nodes with per-node visibility.
struct NodeChain {
  Points nodes;
  std::vector<bool> visible;

  NodeChain() = default;
  explicit NodeChain(Points positions)
      : nodes(std::move(positions)),
        visible(static_cast<std::size_t>(nodes.cols()), true) {}
  NodeChain(Points positions, std::vector<bool> flags)
      : nodes(std::move(positions)), visible(std::move(flags)) {}

  std::size_t size() const { return static_cast<std::size_t>(nodes.cols()); }
  Eigen::Index dim() const { return nodes.rows(); }
  auto node(std::size_t i) const { return nodes.col(static_cast<Eigen::Index>(i)); }
};

/// Throws if the chain breaks a NodeChain invariant.
inline void validate_chain(const NodeChain& chain) {
  if (!valid_dim(chain.dim())) throw Error("chain dimension must be 2 or 3");
  if (chain.size() < kMinNodes) throw Error("node_count below minimum 4");
  if (chain.visible.size() != chain.size())
    throw Error("visibility flags do not match node count");
  if (!all_finite(chain.nodes)) throw Error("chain has non-finite coordinates");
}

/// Unordered observation of one frame. N may be zero.
struct PointCloud {
  Points points;

  PointCloud() = default;
  explicit PointCloud(Points pts) : points(std::move(pts)) {}
  PointCloud(Eigen::Index dim, Eigen::Index count) : points(dim, count) {}

  std::size_t size() const { return static_cast<std::size_t>(points.cols()); }
  Eigen::Index dim() const { return points.rows(); }
  bool empty() const { return points.cols() == 0; }
};

inline void validate_cloud(const PointCloud& cloud, Eigen::Index dim) {
  if (cloud.dim() != dim && !(cloud.empty() && cloud.dim() == 0))
    throw Error("dimension mismatch between chain and cloud");
  if (!all_finite(cloud.points)) throw Error("cloud has non-finite coordinates");
}

struct TrackerConfig {
  int node_count = 24;
  double gamma = 0.8;   // distance attenuation
  double a = 0.6;       // historical-curvature retention
  double b = 0.8;       // bending resistance
  double alpha = 0.75;  // blend weight between displacement and shape estimates
  double r_vis = 20.0;
  int v_lim = 3;
  double omega = 0.05;  // outlier weight
  int em_max_iters = 50;
  double em_tol = 1e-5;

  friend bool operator==(const TrackerConfig&, const TrackerConfig&) = default;
};

/// Returns `cfg` unchanged if every field is in range; otherwise throws an
/// Error naming the first offending field.
inline TrackerConfig validate_config(const TrackerConfig& cfg) {
  auto unit = [](double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; };
  if (cfg.node_count < static_cast<int>(kMinNodes))
    throw Error("node_count below minimum 4");
  if (!unit(cfg.gamma)) throw Error("gamma out of [0,1]");
  if (!std::isfinite(cfg.a) || cfg.a < 0.0) throw Error("a must be >= 0");
  if (!std::isfinite(cfg.b) || cfg.b < 0.0) throw Error("b must be >= 0");
  if (!unit(cfg.alpha)) throw Error("alpha out of [0,1]");
  if (!std::isfinite(cfg.r_vis) || cfg.r_vis <= 0.0) throw Error("r_vis must be > 0");
  if (cfg.v_lim < 1) throw Error("v_lim must be >= 1");
  if (!std::isfinite(cfg.omega) || cfg.omega < 0.0 || cfg.omega >= 1.0)
    throw Error("omega out of [0,1)");
  if (cfg.em_max_iters < 1) throw Error("em_max_iters must be >= 1");
  if (!std::isfinite(cfg.em_tol) || cfg.em_tol <= 0.0) throw Error("em_tol must be > 0");
  return cfg;
}

inline nlohmann::json to_json(const TrackerConfig& cfg) {
  return nlohmann::json{{"node_count", cfg.node_count}, {"gamma", cfg.gamma},
                        {"a", cfg.a},
                        {"b", cfg.b},
                        {"alpha", cfg.alpha},
                        {"r_vis", cfg.r_vis},
                        {"v_lim", cfg.v_lim},
                        {"omega", cfg.omega},
                        {"em_max_iters", cfg.em_max_iters},
                        {"em_tol", cfg.em_tol}};
}

/// Missing fields keep their defaults; unknown fields are rejected so typos
/// in hand-edited files do not pass silently.
inline TrackerConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error("config must be a JSON object");
  TrackerConfig cfg;
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "node_count") cfg.node_count = value.get<int>();
      else if (key == "gamma") cfg.gamma = value.get<double>();
      else if (key == "a") cfg.a = value.get<double>();
      else if (key == "b") cfg.b = value.get<double>();
      else if (key == "alpha") cfg.alpha = value.get<double>();
      else if (key == "r_vis") cfg.r_vis = value.get<double>();
      else if (key == "v_lim") cfg.v_lim = value.get<int>();
      else if (key == "omega") cfg.omega = value.get<double>();
      else if (key == "em_max_iters") cfg.em_max_iters = value.get<int>();
      else if (key == "em_tol") cfg.em_tol = value.get<double>();
      else throw Error("unknown config field '" + key + "'");
    } catch (const nlohmann::json::exception&) {
      throw Error("config field '" + key + "' has the wrong type");
    }
  }
  return cfg;
}

enum class FrameStatus { tracking, coasting, failed };

inline const char* to_string(FrameStatus s) {
  switch (s) {
    case FrameStatus::tracking: return "tracking";
    case FrameStatus::coasting: return "coasting";
    case FrameStatus::failed: return "failed";
  }
  return "unknown";
}

inline FrameStatus frame_status_from_string(const std::string& s) {
  if (s == "tracking") return FrameStatus::tracking;
  if (s == "coasting") return FrameStatus::coasting;
  if (s == "failed") return FrameStatus::failed;
  throw Error("unknown frame status '" + s + "'");
}

struct StageTimings {
  double visibility = 0.0;  // seconds
  double em = 0.0;
  double upe = 0.0;
  double resample = 0.0;

  double total() const { return visibility + em + upe + resample; }
};

struct FrameError {
  double forward = 0.0;   // estimate -> PWL(truth)
  double backward = 0.0;  // truth -> PWL(estimate)
  double symmetric = 0.0;
};

struct TraceEntry {
  std::size_t frame_index = 0;
  NodeChain chain;          // after resampling
  Points pre_resample;      // merged EM + UPE output, before resampling
  std::vector<bool> mask;   // visibility classification for this frame
  int em_iterations = 0;
  StageTimings timings;
  std::optional<FrameError> error;
  FrameStatus status = FrameStatus::tracking;
  std::string diagnostic;
};

class TrackTrace {
 public:
  void append(TraceEntry entry) {
    if (!entries_.empty() && entry.frame_index <= entries_.back().frame_index)
      throw Error("trace frame indices must be strictly increasing");
    entries_.push_back(std::move(entry));
  }

  const std::vector<TraceEntry>& entries() const { return entries_; }
  std::vector<TraceEntry>& entries() { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

 private:
  std::vector<TraceEntry> entries_;
};

}  // namespace dlotrack
