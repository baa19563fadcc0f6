#pragma once

// File formats:
//   dataset  JSON Lines; a header object followed by one object per frame.
//            Coordinates are written with 17 significant digits so a read
//            returns the exact doubles that were written.
//   trace    CSV, one row per frame.
//   summary  JSON object.

#include "dlotrack/dataset.hpp"
#include "dlotrack/metrics.hpp"
#include "dlotrack/types.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace dlotrack {

inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace detail {

inline void append_flat(std::string& out, const Points& pts) {
  out += '[';
  for (Eigen::Index i = 0; i < pts.cols(); ++i)
    for (Eigen::Index d = 0; d < pts.rows(); ++d) {
      if (i > 0 || d > 0) out += ',';
      out += format_double(pts(d, i));
    }
  out += ']';
}

inline void append_vec(std::string& out, const Vec& v) {
  out += '[';
  for (Eigen::Index d = 0; d < v.size(); ++d) {
    if (d > 0) out += ',';
    out += format_double(v(d));
  }
  out += ']';
}

inline Points unflatten(const std::vector<double>& flat, Eigen::Index dim) {
  Points pts(dim, static_cast<Eigen::Index>(flat.size()) / dim);
  for (Eigen::Index i = 0; i < pts.cols(); ++i)
    for (Eigen::Index d = 0; d < dim; ++d) pts(d, i) = flat[static_cast<std::size_t>(i * dim + d)];
  return pts;
}

}  // namespace detail

inline std::string header_line(const DatasetHeader& h) {
  nlohmann::json j{{"version", h.version}, {"dim", h.dim},   {"node_count", h.node_count},
                   {"units", h.units},     {"scenario", h.scenario}, {"seed", h.seed}};
  return j.dump();
}

inline std::string frame_line(const FrameRecord& rec) {
  std::string out = "{\"frame_index\":" + std::to_string(rec.frame_index) + ",\"points\":";
  detail::append_flat(out, rec.cloud.points);
  out += ",\"ground_truth\":";
  detail::append_flat(out, rec.ground_truth);
  out += ",\"occluder\":";
  if (rec.occluder) {
    out += "{\"min\":";
    detail::append_vec(out, rec.occluder->min);
    out += ",\"max\":";
    detail::append_vec(out, rec.occluder->max);
    out += '}';
  } else {
    out += "null";
  }
  out += '}';
  return out;
}

inline void write_dataset(const std::string& path, const DatasetHeader& header,
                          const std::vector<FrameRecord>& frames) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  os << header_line(header) << '\n';
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto& f = frames[i];
    if (f.frame_index != i) throw Error("frame indices must be contiguous from 0");
    if (f.cloud.points.cols() > 0 && f.cloud.dim() != header.dim) throw Error("frame dimension differs from header");
    os << frame_line(f) << '\n';
  }
  if (!os) throw Error("write to '" + path + "' failed");
}

/// Streams frames from a dataset file, validating each record against the
/// header.
class DatasetReader {
 public:
  explicit DatasetReader(const std::string& path) : is_(path, std::ios::binary) {
    if (!is_) throw Error("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(is_, line)) throw Error("line 1: missing dataset header");
    line_no_ = 1;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw Error("line 1: malformed dataset header");
    try {
      header_.version = j.at("version").get<std::string>();
      if (header_.version != kDatasetVersion)
        throw Error("line 1: unsupported dataset version '" + header_.version + "'");
      header_.dim = j.at("dim").get<int>();
      header_.node_count = j.at("node_count").get<int>();
      header_.units = j.value("units", std::string());
      header_.scenario = j.value("scenario", nlohmann::json::object());
      header_.seed = j.value("seed", std::uint64_t{0});
    } catch (const nlohmann::json::exception& e) {
      throw Error(std::string("line 1: malformed dataset header: ") + e.what());
    }
    if (header_.dim != 2 && header_.dim != 3) throw Error("line 1: dim must be 2 or 3");
    if (header_.node_count < static_cast<int>(kMinNodes)) throw Error("line 1: node_count below minimum 4");
  }

  const DatasetHeader& header() const { return header_; }

  /// Next frame, or nullopt at end of file.
  std::optional<FrameRecord> next() {
    std::string line;
    while (std::getline(is_, line)) {
      ++line_no_;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      return parse(line);
    }
    return std::nullopt;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    std::string last = next_index_ == 0 ? "none" : std::to_string(next_index_ - 1);
    throw Error("line " + std::to_string(line_no_) + ": " + what + " (last valid frame: " + last + ")");
  }

  FrameRecord parse(const std::string& line) {
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) fail("malformed frame record");
    FrameRecord rec;
    const Eigen::Index dim = header_.dim;
    try {
      rec.frame_index = j.at("frame_index").get<std::size_t>();
      if (rec.frame_index != next_index_)
        fail("frame index " + std::to_string(rec.frame_index) + " breaks contiguity");
      auto pts = j.at("points").get<std::vector<double>>();
      if (pts.size() % static_cast<std::size_t>(dim) != 0) fail("point array length does not match D=" + std::to_string(dim));
      rec.cloud = PointCloud(detail::unflatten(pts, dim));
      auto gt = j.value("ground_truth", std::vector<double>{});
      if (!gt.empty() && gt.size() != static_cast<std::size_t>(header_.node_count * dim))
        fail("ground truth has " + std::to_string(gt.size()) + " values, expected M*D=" +
             std::to_string(header_.node_count * dim));
      rec.ground_truth = detail::unflatten(gt, dim);
      if (j.contains("occluder") && !j["occluder"].is_null()) {
        auto lo = j["occluder"].at("min").get<std::vector<double>>();
        auto hi = j["occluder"].at("max").get<std::vector<double>>();
        if (lo.size() != static_cast<std::size_t>(dim) || hi.size() != static_cast<std::size_t>(dim))
          fail("occluder box dimension mismatch");
        rec.occluder = Box{detail::unflatten(lo, dim).col(0), detail::unflatten(hi, dim).col(0)};
      }
    } catch (const nlohmann::json::exception& e) {
      fail(std::string("malformed frame record: ") + e.what());
    }
    if (!rec.cloud.points.allFinite() || !rec.ground_truth.allFinite()) fail("non-finite coordinates");
    ++next_index_;
    return rec;
  }

  std::ifstream is_;
  DatasetHeader header_;
  std::size_t line_no_ = 0;
  std::size_t next_index_ = 0;
};

inline std::pair<DatasetHeader, std::vector<FrameRecord>> read_dataset(const std::string& path) {
  DatasetReader reader(path);
  std::vector<FrameRecord> frames;
  while (auto rec = reader.next()) frames.push_back(std::move(*rec));
  return {reader.header(), std::move(frames)};
}

// --- trace CSV ---------------------------------------------------------------

inline constexpr const char* kTraceColumns =
    "frame,forward,backward,symmetric,t_visibility,t_em,t_upe,t_resample,status,em_iterations,visible,mask,nodes,truth";

namespace detail {

// "x y z;x y z;..." -- no commas, so the field needs no quoting.
inline std::string nodes_field(const Points& pts) {
  std::string out;
  for (Eigen::Index i = 0; i < pts.cols(); ++i) {
    if (i > 0) out += ';';
    for (Eigen::Index d = 0; d < pts.rows(); ++d) {
      if (d > 0) out += ' ';
      out += format_double(pts(d, i));
    }
  }
  return out;
}

inline Points parse_nodes_field(const std::string& s) {
  if (s.empty()) return {};
  std::vector<std::vector<double>> nodes;
  std::stringstream ss(s);
  std::string node;
  while (std::getline(ss, node, ';')) {
    std::istringstream ns(node);
    std::vector<double> v;
    double x;
    while (ns >> x) v.push_back(x);
    if (!ns.eof()) throw Error("bad coordinate in nodes field");
    nodes.push_back(std::move(v));
  }
  const auto dim = static_cast<Eigen::Index>(nodes.front().size());
  Points pts(dim, static_cast<Eigen::Index>(nodes.size()));
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (static_cast<Eigen::Index>(nodes[i].size()) != dim) throw Error("inconsistent node dimension");
    for (Eigen::Index d = 0; d < dim; ++d) pts(d, static_cast<Eigen::Index>(i)) = nodes[i][static_cast<std::size_t>(d)];
  }
  return pts;
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace detail

/// `truth` is indexed like trace entries; missing or empty entries leave the
/// column blank.
inline void write_trace_csv(const std::string& path, const TrackTrace& trace, const std::vector<Points>& truth = {}) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  os << kTraceColumns << '\n';
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& e = trace.entries()[i];
    std::size_t visible = 0;
    std::string mask;
    for (bool f : e.mask) {
      visible += f ? 1 : 0;
      mask += f ? '1' : '0';
    }
    os << e.frame_index << ',';
    if (e.error)
      os << format_double(e.error->forward) << ',' << format_double(e.error->backward) << ','
         << format_double(e.error->symmetric) << ',';
    else
      os << ",,,";
    os << format_double(e.timings.visibility) << ',' << format_double(e.timings.em) << ','
       << format_double(e.timings.upe) << ',' << format_double(e.timings.resample) << ',' << to_string(e.status)
       << ',' << e.em_iterations << ',' << visible << ',' << mask << ',' << detail::nodes_field(e.chain.nodes) << ','
       << (i < truth.size() ? detail::nodes_field(truth[i]) : std::string()) << '\n';
  }
  if (!os) throw Error("write to '" + path + "' failed");
}

struct LoadedTrace {
  TrackTrace trace;
  std::vector<Points> truth;  // empty Points where the column was blank
};

inline LoadedTrace read_trace_csv(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(is, line) || line.rfind("frame,forward,backward,symmetric", 0) != 0)
    throw Error("line 1: not a trace CSV");
  LoadedTrace out;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto f = detail::split_csv(line);
    if (f.size() != 14) throw Error("line " + std::to_string(line_no) + ": expected 14 columns");
    try {
      TraceEntry e;
      e.frame_index = std::stoul(f[0]);
      if (!f[3].empty()) e.error = FrameError{std::stod(f[1]), std::stod(f[2]), std::stod(f[3])};
      e.timings = {std::stod(f[4]), std::stod(f[5]), std::stod(f[6]), std::stod(f[7])};
      e.status = frame_status_from_string(f[8]);
      e.em_iterations = std::stoi(f[9]);
      for (char c : f[11]) e.mask.push_back(c == '1');
      e.chain = NodeChain(detail::parse_nodes_field(f[12]), e.mask);
      out.truth.push_back(detail::parse_nodes_field(f[13]));
      out.trace.append(std::move(e));
    } catch (const Error& err) {
      throw Error("line " + std::to_string(line_no) + ": " + err.what());
    } catch (const std::exception&) {
      throw Error("line " + std::to_string(line_no) + ": malformed trace row");
    }
  }
  return out;
}

inline nlohmann::json to_json(const MeanStd& ms) { return {{"mean", ms.mean}, {"std", ms.std}}; }

inline nlohmann::json to_json(const TraceSummary& s) {
  return {{"frames", s.frames},
          {"evaluated_frames", s.evaluated_frames},
          {"warmup", s.warmup},
          {"coasting_frames", s.coasting_frames},
          {"failed_frames", s.failed_frames},
          {"error",
           {{"mean", s.mean_error},
            {"q1", s.q1_error},
            {"median", s.median_error},
            {"q3", s.q3_error},
            {"max", s.max_error}}},
          {"time_s",
           {{"visibility", to_json(s.visibility)},
            {"em", to_json(s.em)},
            {"upe", to_json(s.upe)},
            {"resample", to_json(s.resample)},
            {"total", to_json(s.total)}}}};
}

}  // namespace dlotrack
