#pragma once

#include "dlotrack/types.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string>

namespace dlotrack {

inline constexpr const char* kDatasetVersion = "dlotrack/1";

/// Closed axis-aligned box.
struct Box {
  Vec min;
  Vec max;

  bool contains(const Eigen::Ref<const Vec>& p) const {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }
  friend bool operator==(const Box& l, const Box& r) { return l.min == r.min && l.max == r.max; }
};

struct FrameRecord {
  std::size_t frame_index = 0;
  PointCloud cloud;
  Points ground_truth;  // D x M, uniform in arc length; may be empty
  std::optional<Box> occluder;
};

struct DatasetHeader {
  std::string version = kDatasetVersion;
  int dim = 3;
  int node_count = 24;
  std::string units = "abstract length units";
  nlohmann::json scenario = nlohmann::json::object();
  std::uint64_t seed = 0;
};

}  // namespace dlotrack
