// dlotrack: simulate datasets, track them, and report accuracy and timing.

#include "dlotrack/dlotrack.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

namespace fs = std::filesystem;
using namespace dlotrack;

namespace {

TrackerConfig load_config(const std::string& path) {
  if (path.empty()) return validate_config(TrackerConfig{});
  std::ifstream is(path);
  if (!is) throw Error("cannot open config '" + path + "'");
  nlohmann::json j = nlohmann::json::parse(is, nullptr, false);
  if (j.is_discarded()) throw Error("config '" + path + "' is not valid JSON");
  return validate_config(config_from_json(j));
}

Scenario load_scenario(const std::string& name_or_file) {
  if (fs::exists(name_or_file)) {
    std::ifstream is(name_or_file);
    nlohmann::json j = nlohmann::json::parse(is, nullptr, false);
    if (j.is_discarded()) throw Error("scenario file '" + name_or_file + "' is not valid JSON");
    return scenario_from_json(j);
  }
  return builtin_scenario(name_or_file);
}

std::string summary_path(const std::string& trace_path) {
  fs::path p(trace_path);
  p.replace_extension(".summary.json");
  return p.string();
}

void print_summary(const TraceSummary& s) {
  auto ms = [](const MeanStd& v) { return std::to_string(v.mean * 1e3) + " +/- " + std::to_string(v.std * 1e3) + " ms"; };
  std::cout << "frames            " << s.frames << " (warm-up " << s.warmup << ", evaluated " << s.evaluated_frames
            << ")\n"
            << "coasting / failed " << s.coasting_frames << " / " << s.failed_frames << "\n"
            << "frame error       mean " << s.mean_error << "  IQR [" << s.q1_error << ", " << s.q3_error
            << "]  max " << s.max_error << "\n"
            << "time visibility   " << ms(s.visibility) << "\n"
            << "time em           " << ms(s.em) << "\n"
            << "time upe          " << ms(s.upe) << "\n"
            << "time resample     " << ms(s.resample) << "\n"
            << "time total        " << ms(s.total) << "\n";
}

std::vector<Points> truths_of(const std::vector<FrameRecord>& frames, const TrackTrace& trace) {
  std::vector<Points> out;
  for (std::size_t i = 0; i < trace.size(); ++i) out.push_back(frames[i].ground_truth);
  return out;
}

std::size_t effective_warmup(std::size_t requested, std::size_t frames) {
  return requested < frames ? requested : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deformable linear object tracking under occlusion"};
  app.require_subcommand(1);
  bool json = false;
  app.add_flag("--json", json, "Print machine-readable JSON to stdout");

  auto* sim = app.add_subcommand("simulate", "Generate a synthetic dataset");
  std::string scenario_arg, out_path;
  std::optional<std::uint64_t> seed;
  std::optional<double> noise, outliers;
  sim->add_option("--scenario", scenario_arg, "Built-in scenario name or scenario JSON file")->required();
  sim->add_option("--out", out_path, "Output dataset (.jsonl)")->required();
  sim->add_option("--seed", seed, "Override the scenario seed");
  sim->add_option("--noise", noise, "Override noise sigma");
  sim->add_option("--outlier-rate", outliers, "Override outlier rate");

  auto* track = app.add_subcommand("track", "Track a dataset and write a trace");
  std::string dataset_path, config_path, trace_out;
  bool no_timing = false, no_upe = false;
  std::size_t warmup = kDefaultWarmup;
  track->add_option("--dataset", dataset_path, "Input dataset (.jsonl)")->required()->check(CLI::ExistingFile);
  track->add_option("--config", config_path, "Tracker config JSON (defaults when omitted)");
  track->add_option("--out-trace", trace_out, "Output trace CSV; summary goes to <stem>.summary.json")->required();
  track->add_flag("--no-timing", no_timing, "Write zero timings for byte-reproducible traces");
  track->add_flag("--no-upe", no_upe, "Hold occluded nodes at their last position (ablation)");
  track->add_option("--warmup", warmup, "Frames excluded from the summary");

  auto* eval = app.add_subcommand("eval", "Summarise a trace");
  std::string trace_in;
  eval->add_option("--trace", trace_in, "Trace CSV")->required()->check(CLI::ExistingFile);
  eval->add_option("--warmup", warmup, "Frames excluded from the summary");

  auto* bench = app.add_subcommand("bench", "Time the tracker over repeated independent runs");
  int trials = 10;
  bench->add_option("--dataset", dataset_path, "Input dataset (.jsonl)")->required()->check(CLI::ExistingFile);
  bench->add_option("--config", config_path, "Tracker config JSON");
  bench->add_option("--trials", trials, "Number of independent runs")->check(CLI::PositiveNumber);

  auto* plot = app.add_subcommand("plot", "Render error-vs-frame and a chain snapshot to SVG");
  std::string svg_out;
  std::optional<std::size_t> snapshot;
  plot->add_option("--trace", trace_in, "Trace CSV")->required()->check(CLI::ExistingFile);
  plot->add_option("--out", svg_out, "Output SVG")->required();
  plot->add_option("--frame", snapshot, "Frame for the chain snapshot (default: last)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) {
      Scenario sc = load_scenario(scenario_arg);
      if (seed) sc.seed = *seed;
      if (noise) sc.noise_sigma = *noise;
      if (outliers) sc.outlier_rate = *outliers;
      auto frames = generate(sc);
      DatasetHeader h;
      h.dim = sc.dim;
      h.node_count = sc.node_count;
      h.scenario = to_json(sc);
      h.seed = sc.seed;
      write_dataset(out_path, h, frames);
      std::size_t pts = 0;
      for (const auto& f : frames) pts += f.cloud.size();
      if (json)
        std::cout << nlohmann::json{{"out", out_path}, {"scenario", sc.name}, {"frames", frames.size()},
                                    {"points", pts}}
                         .dump()
                  << "\n";
      else
        std::cout << "wrote " << frames.size() << " frames of '" << sc.name << "' to " << out_path << "\n";
    } else if (*track) {
      TrackerConfig cfg = load_config(config_path);
      auto [header, frames] = read_dataset(dataset_path);
      if (header.node_count != cfg.node_count)
        throw Error("dataset has M=" + std::to_string(header.node_count) + " but config node_count=" +
                    std::to_string(cfg.node_count));
      RunOptions opts;
      opts.mode = no_upe ? OcclusionMode::freeze : OcclusionMode::upe;
      opts.record_timing = !no_timing;
      TrackTrace trace = track_sequence(frames, cfg, opts);
      write_trace_csv(trace_out, trace, truths_of(frames, trace));
      TraceSummary s = aggregate(trace, effective_warmup(warmup, trace.size()));
      std::ofstream(summary_path(trace_out)) << to_json(s).dump(2) << "\n";
      if (json)
        std::cout << to_json(s).dump() << "\n";
      else
        print_summary(s);
      if (s.failed_frames > 0) {
        std::cerr << "tracking failed: " << trace.entries().back().diagnostic << "\n";
        return 2;
      }
    } else if (*eval) {
      auto loaded = read_trace_csv(trace_in);
      TraceSummary s = aggregate(loaded.trace, effective_warmup(warmup, loaded.trace.size()));
      if (json)
        std::cout << to_json(s).dump() << "\n";
      else
        print_summary(s);
    } else if (*bench) {
      TrackerConfig cfg = load_config(config_path);
      auto [header, frames] = read_dataset(dataset_path);
      std::vector<double> vis, em, upe, res, total;
      for (int t = 0; t < trials; ++t) {
        TrackTrace trace = track_sequence(frames, cfg);
        TraceSummary s = aggregate(trace, 0);
        vis.push_back(s.visibility.mean);
        em.push_back(s.em.mean);
        upe.push_back(s.upe.mean);
        res.push_back(s.resample.mean);
        total.push_back(s.total.mean);
      }
      auto vs = mean_std(vis), es = mean_std(em), us = mean_std(upe), rs = mean_std(res), ts = mean_std(total);
      if (json) {
        std::cout << nlohmann::json{{"trials", trials},
                                    {"frames", frames.size()},
                                    {"per_frame_time_s",
                                     {{"visibility", to_json(vs)},
                                      {"em", to_json(es)},
                                      {"upe", to_json(us)},
                                      {"resample", to_json(rs)},
                                      {"total", to_json(ts)}}}}
                         .dump()
                  << "\n";
      } else {
        auto line = [](const char* name, const MeanStd& v) {
          std::cout << name << v.mean * 1e3 << " +/- " << v.std * 1e3 << " ms\n";
        };
        std::cout << trials << " trials over " << frames.size() << " frames, mean per-frame time:\n";
        line("  visibility ", vs);
        line("  em         ", es);
        line("  upe        ", us);
        line("  resample   ", rs);
        line("  total      ", ts);
      }
    } else if (*plot) {
      auto loaded = read_trace_csv(trace_in);
      std::size_t frame = snapshot ? *snapshot : loaded.trace.size() - 1;
      std::size_t idx = loaded.trace.size() - 1;
      for (std::size_t i = 0; i < loaded.trace.size(); ++i)
        if (loaded.trace.entries()[i].frame_index == frame) idx = i;
      write_svg(svg_out, loaded.trace, loaded.truth, idx);
      if (json)
        std::cout << nlohmann::json{{"out", svg_out}, {"snapshot_frame", loaded.trace.entries()[idx].frame_index}}.dump()
                  << "\n";
      else
        std::cout << "wrote " << svg_out << "\n";
    }
  } catch (const std::exception& e) {
    if (json)
      std::cout << nlohmann::json{{"error", e.what()}}.dump() << "\n";
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
