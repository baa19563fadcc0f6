#pragma once

// Synthetic rope scenarios with analytic ground truth.
//
// The rope shape at a frame is a Catmull-Rom spline through control points
// that are linearly interpolated between keyframes. The spline is scaled
// about its first control point so its length always equals
// `rope_length`, which keeps the rope inextensible. Observations are
// regular arc-length samples with Gaussian noise and uniform outliers;
// points inside the active occluder box are removed.

#include "dlotrack/dataset.hpp"
#include "dlotrack/parallel.hpp"
#include "dlotrack/types.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace dlotrack {

struct Keyframe {
  std::size_t frame = 0;
  Points control;  // D x K control points, K >= 2
};

/// Axis-aligned occluder moving at constant velocity while active.
struct Occluder {
  Vec center;
  Vec half_extent;
  Vec velocity;
  std::size_t active_from = 0;
  std::optional<std::size_t> active_until;  // exclusive

  bool active(std::size_t frame) const {
    return frame >= active_from && (!active_until || frame < *active_until);
  }
  Box box_at(std::size_t frame) const {
    const double dt = static_cast<double>(frame) - static_cast<double>(active_from);
    Vec c = center + dt * velocity;
    return {c - half_extent, c + half_extent};
  }
};

struct Scenario {
  std::string name;
  std::size_t duration = 1;
  int dim = 3;
  int node_count = 24;
  double rope_length = 800.0;
  std::vector<Keyframe> rope;
  double sample_density = 1.0;  // points per unit length
  double noise_sigma = 1.0;
  double outlier_rate = 0.02;
  std::optional<Occluder> occluder;
  std::uint64_t seed = 0;
};

inline constexpr int kSplineSamplesPerSpan = 64;

namespace detail {

inline Points catmull_rom(const Points& ctrl) {
  const Eigen::Index k = ctrl.cols();
  auto at = [&](Eigen::Index i) -> Vec {
    if (i < 0) return 2.0 * ctrl.col(0) - ctrl.col(1);
    if (i >= k) return 2.0 * ctrl.col(k - 1) - ctrl.col(k - 2);
    return ctrl.col(i);
  };
  Points out(ctrl.rows(), (k - 1) * kSplineSamplesPerSpan + 1);
  Eigen::Index idx = 0;
  for (Eigen::Index s = 0; s + 1 < k; ++s) {
    const Vec p0 = at(s - 1), p1 = at(s), p2 = at(s + 1), p3 = at(s + 2);
    for (int j = 0; j < kSplineSamplesPerSpan; ++j) {
      const double t = static_cast<double>(j) / kSplineSamplesPerSpan;
      const double t2 = t * t, t3 = t2 * t;
      out.col(idx++) = 0.5 * ((2.0 * p1) + (-p0 + p2) * t + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * t2 +
                              (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * t3);
    }
  }
  out.col(idx) = ctrl.col(k - 1);
  return out;
}

inline std::vector<double> cumulative_length(const Points& poly) {
  std::vector<double> cum(static_cast<std::size_t>(poly.cols()), 0.0);
  for (Eigen::Index i = 1; i < poly.cols(); ++i)
    cum[static_cast<std::size_t>(i)] = cum[static_cast<std::size_t>(i - 1)] + (poly.col(i) - poly.col(i - 1)).norm();
  return cum;
}

/// Points at the given (sorted, in-range) arc-length positions.
inline Points sample_at(const Points& poly, const std::vector<double>& cum, const std::vector<double>& s) {
  Points out(poly.rows(), static_cast<Eigen::Index>(s.size()));
  std::size_t seg = 0;
  const std::size_t last = cum.size() - 2;
  for (std::size_t i = 0; i < s.size(); ++i) {
    while (seg < last && s[i] > cum[seg + 1]) ++seg;
    const double len = cum[seg + 1] - cum[seg];
    const double t = len > 0.0 ? std::clamp((s[i] - cum[seg]) / len, 0.0, 1.0) : 0.0;
    const auto si = static_cast<Eigen::Index>(seg);
    out.col(static_cast<Eigen::Index>(i)) = (1.0 - t) * poly.col(si) + t * poly.col(si + 1);
  }
  return out;
}

}  // namespace detail

inline void validate_scenario(const Scenario& sc) {
  if (sc.dim != 2 && sc.dim != 3) throw Error("scenario dim must be 2 or 3");
  if (sc.node_count < static_cast<int>(kMinNodes)) throw Error("node_count below minimum 4");
  if (sc.duration < 1) throw Error("scenario duration must be >= 1");
  if (!(sc.rope_length > 0.0)) throw Error("rope_length must be > 0");
  if (!(sc.sample_density > 0.0)) throw Error("sample_density must be > 0");
  if (!(sc.noise_sigma >= 0.0)) throw Error("noise_sigma must be >= 0");
  if (!(sc.outlier_rate >= 0.0 && sc.outlier_rate < 0.5)) throw Error("outlier_rate out of [0,0.5)");
  if (sc.rope.empty()) throw Error("scenario has no rope keyframes");
  for (std::size_t i = 0; i < sc.rope.size(); ++i) {
    const auto& kf = sc.rope[i];
    if (kf.control.rows() != sc.dim || kf.control.cols() < 2)
      throw Error("keyframe needs >= 2 control points of the scenario dimension");
    if (kf.control.cols() != sc.rope.front().control.cols())
      throw Error("keyframes must share the control point count");
    if (i > 0 && kf.frame <= sc.rope[i - 1].frame) throw Error("keyframes must be strictly increasing");
  }
  if (sc.occluder) {
    const auto& o = *sc.occluder;
    if (o.center.size() != sc.dim || o.half_extent.size() != sc.dim || o.velocity.size() != sc.dim)
      throw Error("occluder dimension mismatch");
  }
}

/// Control points at `frame`, interpolated linearly between keyframes.
inline Points control_points_at(const Scenario& sc, std::size_t frame) {
  const auto& kf = sc.rope;
  if (frame <= kf.front().frame) return kf.front().control;
  if (frame >= kf.back().frame) return kf.back().control;
  std::size_t i = 1;
  while (kf[i].frame < frame) ++i;
  const double t = static_cast<double>(frame - kf[i - 1].frame) /
                   static_cast<double>(kf[i].frame - kf[i - 1].frame);
  return (1.0 - t) * kf[i - 1].control + t * kf[i].control;
}

/// Dense polyline of the true rope at `frame`, length exactly rope_length.
inline Points rope_curve(const Scenario& sc, std::size_t frame) {
  Points ctrl = control_points_at(sc, frame);
  Points poly = detail::catmull_rom(ctrl);
  const double len = detail::cumulative_length(poly).back();
  if (!(len > 0.0)) throw Error("rope control points are degenerate");
  const Vec origin = ctrl.col(0);
  const double scale = sc.rope_length / len;
  for (Eigen::Index i = 0; i < poly.cols(); ++i) poly.col(i) = origin + scale * (poly.col(i) - origin);
  return poly;
}

/// M nodes at uniform arc length on the true rope.
inline Points ground_truth_nodes(const Points& curve, int node_count) {
  auto cum = detail::cumulative_length(curve);
  std::vector<double> s(static_cast<std::size_t>(node_count));
  for (int k = 0; k < node_count; ++k) s[static_cast<std::size_t>(k)] = cum.back() * k / (node_count - 1);
  Points nodes = detail::sample_at(curve, cum, s);
  nodes.col(node_count - 1) = curve.col(curve.cols() - 1);
  return nodes;
}

inline FrameRecord generate_frame(const Scenario& sc, std::size_t frame) {
  const Points curve = rope_curve(sc, frame);
  const auto cum = detail::cumulative_length(curve);
  const double length = cum.back();

  const auto n_curve = static_cast<std::size_t>(std::floor(length * sc.sample_density));
  std::vector<double> s(n_curve);
  for (std::size_t k = 0; k < n_curve; ++k) s[k] = (static_cast<double>(k) + 0.5) / sc.sample_density;
  Points samples = detail::sample_at(curve, cum, s);

  std::seed_seq seq{static_cast<std::uint32_t>(sc.seed), static_cast<std::uint32_t>(sc.seed >> 32),
                    static_cast<std::uint32_t>(frame), static_cast<std::uint32_t>(frame >> 32)};
  std::mt19937_64 rng(seq);
  if (sc.noise_sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, sc.noise_sigma);
    for (Eigen::Index i = 0; i < samples.cols(); ++i)
      for (Eigen::Index d = 0; d < samples.rows(); ++d) samples(d, i) += noise(rng);
  }

  const auto n_out = static_cast<std::size_t>(std::llround(sc.outlier_rate * static_cast<double>(n_curve)));
  Points outliers(sc.dim, static_cast<Eigen::Index>(n_out));
  if (n_out > 0) {
    const double pad = 0.05 * sc.rope_length;
    Vec lo = curve.rowwise().minCoeff().array() - pad;
    Vec hi = curve.rowwise().maxCoeff().array() + pad;
    for (Eigen::Index d = 0; d < sc.dim; ++d) {
      std::uniform_real_distribution<double> u(lo(d), hi(d));
      for (Eigen::Index i = 0; i < outliers.cols(); ++i) outliers(d, i) = u(rng);
    }
  }

  FrameRecord rec;
  rec.frame_index = frame;
  rec.ground_truth = ground_truth_nodes(curve, sc.node_count);
  if (sc.occluder && sc.occluder->active(frame)) rec.occluder = sc.occluder->box_at(frame);

  Points all(sc.dim, samples.cols() + outliers.cols());
  all << samples, outliers;
  std::vector<Eigen::Index> keep;
  keep.reserve(static_cast<std::size_t>(all.cols()));
  for (Eigen::Index i = 0; i < all.cols(); ++i)
    if (!rec.occluder || !rec.occluder->contains(all.col(i))) keep.push_back(i);
  rec.cloud = PointCloud(all(Eigen::all, keep));
  return rec;
}

/// All frames of a scenario. Frames are independent (each has its own RNG
/// stream), so parallel generation matches sequential generation.
inline std::vector<FrameRecord> generate(const Scenario& sc) {
  validate_scenario(sc);
  if (sc.occluder && sc.occluder->active(0)) {
    const Box box = sc.occluder->box_at(0);
    const Points curve = rope_curve(sc, 0);
    bool all_hidden = true;
    for (Eigen::Index i = 0; i < curve.cols() && all_hidden; ++i) all_hidden = box.contains(curve.col(i));
    if (all_hidden) throw Error("occluder covers the entire rope at frame 0");
  }
  for (const auto& kf : sc.rope) rope_curve(sc, kf.frame);
  std::vector<FrameRecord> frames(sc.duration);
  parallel_for(sc.duration, [&](std::size_t f) { frames[f] = generate_frame(sc, f); });
  return frames;
}

// --- presets ----------------------------------------------------------------

namespace detail {

inline Points lift(const std::vector<std::array<double, 3>>& pts, int dim) {
  Points out(dim, static_cast<Eigen::Index>(pts.size()));
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (int d = 0; d < dim; ++d) out(d, static_cast<Eigen::Index>(i)) = pts[i][static_cast<std::size_t>(d)];
  return out;
}

// One period of a sine: upper bend first, lower bend second.
inline std::vector<std::array<double, 3>> s_shape() {
  std::vector<std::array<double, 3>> pts;
  const double width = 560.0, amp = 90.0;
  for (int i = 0; i <= 12; ++i) {
    const double x = width * i / 12.0;
    pts.push_back({x, amp * std::sin(2.0 * std::numbers::pi * x / width), 8.0 * std::sin(std::numbers::pi * x / width)});
  }
  return pts;
}

// Point at a fraction of arc length along the rope at frame 0.
inline Vec point_on_rope(const Scenario& sc, double fraction) {
  Points curve = rope_curve(sc, 0);
  auto cum = cumulative_length(curve);
  return sample_at(curve, cum, {fraction * cum.back()}).col(0);
}

}  // namespace detail

inline Scenario make_straight_static(int dim = 3) {
  Scenario sc;
  sc.name = "straight_static";
  sc.duration = 200;
  sc.dim = dim;
  sc.rope = {{0, detail::lift({{0.0, 0.0, 0.0}, {800.0, 0.0, 0.0}}, dim)}};
  sc.seed = 11;
  return sc;
}

inline Scenario make_s_static(int dim = 3) {
  Scenario sc;
  sc.name = "s_static";
  sc.duration = 320;
  sc.dim = dim;
  sc.rope = {{0, detail::lift(detail::s_shape(), dim)}};
  sc.seed = 23;
  Occluder occ;
  occ.center = detail::point_on_rope(sc, 0.75);
  occ.half_extent = Vec::Constant(dim, 60.0);
  occ.velocity = Vec::Zero(dim);
  occ.active_from = 120;
  sc.occluder = occ;
  return sc;
}

inline Scenario make_dynamic(int dim = 3) {
  Scenario sc;
  sc.name = "dynamic";
  sc.duration = 320;
  sc.dim = dim;
  Points start = detail::lift(detail::s_shape(), dim);
  // The rope drifts across the workspace while its free end is dragged up
  // and outward. The occluder travels with the drift, so the hidden
  // section keeps moving behind it.
  const Vec drift = (Vec(3) << 80.0, 140.0, 0.0).finished().head(dim);
  Points pulled = start;
  const Eigen::Index k = start.cols();
  for (Eigen::Index i = k - 4; i < k; ++i) {
    const double w = static_cast<double>(i - (k - 5)) / 4.0;
    pulled(0, i) += 60.0 * w;
    pulled(1, i) += 110.0 * w;
  }
  pulled.colwise() += drift;
  sc.rope = {{120, start}, {320, pulled}};
  sc.seed = 37;
  Occluder occ;
  occ.center = detail::point_on_rope(sc, 0.75);
  occ.half_extent = Vec::Constant(dim, 60.0);
  occ.velocity = drift / 200.0;
  occ.active_from = 120;
  sc.occluder = occ;
  return sc;
}

inline Scenario make_tip_occlusion(int dim = 3) {
  Scenario sc;
  sc.name = "tip_occlusion";
  sc.duration = 160;
  sc.dim = dim;
  Points start = detail::lift({{0.0, 0.0, 0.0}, {270.0, 30.0, 0.0}, {540.0, 0.0, 0.0}, {790.0, -40.0, 0.0}}, dim);
  Points moved = start;
  moved.row(1).array() += 60.0;
  sc.rope = {{40, start}, {160, moved}};
  sc.seed = 41;
  Occluder occ;
  occ.center = detail::point_on_rope(sc, 0.97);
  occ.center(1) += 30.0;
  occ.half_extent = Vec::Constant(dim, 80.0);
  occ.half_extent(1) = 120.0;
  occ.velocity = Vec::Zero(dim);
  occ.active_from = 30;
  sc.occluder = occ;
  return sc;
}

inline Scenario make_full_dropout(int dim = 3) {
  Scenario sc;
  sc.name = "full_dropout";
  sc.duration = 150;
  sc.dim = dim;
  Points start = detail::lift(detail::s_shape(), dim);
  Points moved = start;
  moved.row(0).array() += 40.0;
  sc.rope = {{0, start}, {150, moved}};
  sc.seed = 53;
  Occluder occ;
  occ.center = Vec::Zero(dim);
  occ.center(0) = 320.0;
  occ.half_extent = Vec::Constant(dim, 500.0);
  occ.velocity = Vec::Zero(dim);
  occ.active_from = 80;
  occ.active_until = 90;
  sc.occluder = occ;
  return sc;
}

inline std::vector<Scenario> builtin_scenarios() {
  return {make_straight_static(), make_s_static(), make_dynamic(), make_tip_occlusion(), make_full_dropout()};
}

inline Scenario builtin_scenario(const std::string& name) {
  for (auto& sc : builtin_scenarios())
    if (sc.name == name) return sc;
  throw Error("unknown scenario '" + name + "'");
}

// --- JSON descriptor -------------------------------------------------------

namespace detail {

inline nlohmann::json vec_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

inline Vec json_vec(const nlohmann::json& j) {
  auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace detail

inline nlohmann::json to_json(const Scenario& sc) {
  nlohmann::json j;
  j["name"] = sc.name;
  j["duration"] = sc.duration;
  j["dim"] = sc.dim;
  j["node_count"] = sc.node_count;
  j["rope_length"] = sc.rope_length;
  j["sample_density"] = sc.sample_density;
  j["noise_sigma"] = sc.noise_sigma;
  j["outlier_rate"] = sc.outlier_rate;
  j["seed"] = sc.seed;
  nlohmann::json rope = nlohmann::json::array();
  for (const auto& kf : sc.rope) {
    nlohmann::json ctrl = nlohmann::json::array();
    for (Eigen::Index i = 0; i < kf.control.cols(); ++i) ctrl.push_back(detail::vec_json(kf.control.col(i)));
    rope.push_back({{"frame", kf.frame}, {"control", ctrl}});
  }
  j["rope"] = rope;
  if (sc.occluder) {
    const auto& o = *sc.occluder;
    j["occluder"] = {{"center", detail::vec_json(o.center)},
                     {"half_extent", detail::vec_json(o.half_extent)},
                     {"velocity", detail::vec_json(o.velocity)},
                     {"active_from", o.active_from},
                     {"active_until", o.active_until ? nlohmann::json(*o.active_until) : nlohmann::json(nullptr)}};
  } else {
    j["occluder"] = nullptr;
  }
  return j;
}

inline Scenario scenario_from_json(const nlohmann::json& j) {
  try {
    Scenario sc;
    sc.name = j.value("name", std::string("custom"));
    sc.duration = j.at("duration").get<std::size_t>();
    sc.dim = j.value("dim", 3);
    sc.node_count = j.value("node_count", 24);
    sc.rope_length = j.value("rope_length", 800.0);
    sc.sample_density = j.value("sample_density", 1.0);
    sc.noise_sigma = j.value("noise_sigma", 1.0);
    sc.outlier_rate = j.value("outlier_rate", 0.02);
    sc.seed = j.value("seed", std::uint64_t{0});
    for (const auto& kf : j.at("rope")) {
      const auto& ctrl = kf.at("control");
      Points pts(sc.dim, static_cast<Eigen::Index>(ctrl.size()));
      for (std::size_t i = 0; i < ctrl.size(); ++i) {
        Vec p = detail::json_vec(ctrl[i]);
        if (p.size() != sc.dim) throw Error("control point dimension mismatch");
        pts.col(static_cast<Eigen::Index>(i)) = p;
      }
      sc.rope.push_back({kf.value("frame", std::size_t{0}), pts});
    }
    if (j.contains("occluder") && !j["occluder"].is_null()) {
      const auto& o = j["occluder"];
      Occluder occ;
      occ.center = detail::json_vec(o.at("center"));
      occ.half_extent = detail::json_vec(o.at("half_extent"));
      occ.velocity = o.contains("velocity") ? detail::json_vec(o["velocity"]) : Vec::Zero(sc.dim);
      occ.active_from = o.value("active_from", std::size_t{0});
      if (o.contains("active_until") && !o["active_until"].is_null())
        occ.active_until = o["active_until"].get<std::size_t>();
      sc.occluder = occ;
    }
    validate_scenario(sc);
    return sc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed scenario: ") + e.what());
  }
}

}  // namespace dlotrack
