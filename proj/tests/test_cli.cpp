#include "support.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

using testing_support::TempDir;

namespace {

struct Result {
  int status;
  std::string out;
};

Result cli(const std::string& args) {
  const std::string cmd = std::string(DLOTRACK_CLI) + " " + args + " 2>&1";
  FILE* p = popen(cmd.c_str(), "r");
  std::string out;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, p)) out.append(buf, n);
  const int raw = pclose(p);
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, out};
}

std::string slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST(Cli, SimulateTrackEvalPlot) {
  TempDir dir;
  const std::string ds = dir.file("d.jsonl"), trace = dir.file("t.csv");
  ASSERT_EQ(cli("simulate --scenario s_static --out " + ds).status, 0);
  const Result tr = cli("track --dataset " + ds + " --out-trace " + trace);
  ASSERT_EQ(tr.status, 0) << tr.out;
  EXPECT_EQ(line_count(slurp(trace)), 321u);  // header plus one row per frame
  EXPECT_FALSE(slurp(dir.file("t.summary.json")).empty());

  const Result ev = cli("--json eval --trace " + trace);
  ASSERT_EQ(ev.status, 0) << ev.out;
  const auto j = nlohmann::json::parse(ev.out);
  EXPECT_EQ(j["frames"], 320);
  EXPECT_EQ(j["failed_frames"], 0);

  ASSERT_EQ(cli("plot --trace " + trace + " --out " + dir.file("p.svg") + " --frame 200").status, 0);
  EXPECT_EQ(slurp(dir.file("p.svg")).rfind("<svg", 0), 0u);
}

TEST(Cli, TraceIsByteReproducibleWithoutTimings) {
  TempDir dir;
  const std::string ds = dir.file("d.jsonl");
  ASSERT_EQ(cli("simulate --scenario tip_occlusion --out " + ds).status, 0);
  ASSERT_EQ(cli("track --no-timing --dataset " + ds + " --out-trace " + dir.file("a.csv")).status, 0);
  ASSERT_EQ(cli("track --no-timing --dataset " + ds + " --out-trace " + dir.file("b.csv")).status, 0);
  EXPECT_EQ(slurp(dir.file("a.csv")), slurp(dir.file("b.csv")));
}

TEST(Cli, ConfigAndBench) {
  TempDir dir;
  const std::string ds = dir.file("d.jsonl");
  ASSERT_EQ(cli("simulate --scenario straight_static --noise 0.5 --out " + ds).status, 0);
  std::ofstream(dir.file("c.json")) << R"({"alpha": 0.5, "em_max_iters": 20})";
  ASSERT_EQ(cli("track --config " + dir.file("c.json") + " --dataset " + ds + " --out-trace " + dir.file("t.csv")).status, 0);
  const Result b = cli("--json bench --trials 2 --dataset " + ds);
  ASSERT_EQ(b.status, 0) << b.out;
  const auto j = nlohmann::json::parse(b.out);
  EXPECT_EQ(j["trials"], 2);
  EXPECT_GT(j["per_frame_time_s"]["total"]["mean"].get<double>(), 0.0);
}

TEST(Cli, ErrorsAreReported) {
  TempDir dir;
  std::ofstream(dir.file("c.json")) << R"({"gamma": 1.3})";
  std::ofstream(dir.file("d.jsonl")) << "{}\n";
  const Result bad_cfg = cli("track --config " + dir.file("c.json") + " --dataset " + dir.file("d.jsonl") +
                             " --out-trace " + dir.file("t.csv"));
  EXPECT_EQ(bad_cfg.status, 1);
  EXPECT_NE(bad_cfg.out.find("gamma out of [0,1]"), std::string::npos) << bad_cfg.out;

  const Result bad_scn = cli("--json simulate --scenario nowhere --out " + dir.file("x.jsonl"));
  EXPECT_EQ(bad_scn.status, 1);
  EXPECT_NE(bad_scn.out.find("\"error\""), std::string::npos);
}
