#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "commands.hpp"
#include "json.hpp"
#include "test_support.hpp"
#include "vlmp/data.hpp"
#include "vlmp/serialization.hpp"

using namespace vlmp;
using namespace vlmp::cli;
namespace fs = std::filesystem;

namespace {

const std::string kData = VLMP_TEST_DATA_DIR;
const std::string kDemos = kData + "/gshape_demos.csv";

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "vlmp");
  std::ostringstream out;
  std::ostringstream err;
  Run r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

// Fresh scratch directory per call.
fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("vlmp_cli_test_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string write(const fs::path& path, const std::string& text) {
  write_file_atomic(path, text);
  return path.string();
}

// Trajectory CSV has the demo columns minus demo_id.
PoseTrajectory load_trajectory_csv(const fs::path& path) {
  std::istringstream in(read_file(path));
  std::string text;
  bool header = true;
  for (std::string line; std::getline(in, line);) {
    if (line.empty()) continue;
    text += (header ? "demo_id," : "0,") + line + "\n";
    header = false;
  }
  return parse_demo_csv(text).demos.front();
}

// Small benchmark configuration keeping the unit tests quick.
std::string quick_config(const fs::path& dir) {
  return write(dir / "quick.json", R"({"trials": 3, "n_points": 100})");
}

}  // namespace

TEST_CASE("usage errors") {
  CHECK(run({}).code == kExitUsage);
  CHECK(run({"frobnicate"}).code == kExitUsage);
  CHECK(run({"learn"}).code == kExitUsage);
  CHECK(run({"--help"}).code == kExitOk);
}

TEST_CASE("errors are reported as JSON on stderr") {
  const Run r = run({"learn", "--demos", "/nonexistent/demos.csv", "--out", scratch("io").string()});
  CHECK(r.code == kExitIo);
  const auto j = nlohmann::json::parse(r.err);
  CHECK(j["error"]["code"] == kExitIo);
  CHECK(j["error"]["kind"] == "io");
  CHECK_FALSE(j["error"]["message"].get<std::string>().empty());
}

TEST_CASE("distinct exit codes") {
  const fs::path dir = scratch("codes");
  SUBCASE("unknown configuration key") {
    const std::string cfg = write(dir / "bad.json", R"({"seed": 1, "colour": "blue"})");
    const Run r = run({"learn", "--demos", kDemos, "--config", cfg, "--out", dir.string()});
    CHECK(r.code == kExitConfig);
    CHECK(r.err.find("colour") != std::string::npos);
  }
  SUBCASE("out-of-range configuration value") {
    const std::string cfg = write(dir / "range.json", R"({"window": 0.9})");
    CHECK(run({"learn", "--demos", kDemos, "--config", cfg, "--out", dir.string()}).code == kExitConfig);
  }
  SUBCASE("unknown method") {
    CHECK(run({"learn", "--demos", kDemos, "--method", "dmp", "--out", dir.string()}).code == kExitUnknownMethod);
    CHECK(run({"benchmark", "--demos", kDemos, "--method", "gpr", "--out", dir.string()}).code == kExitUnknownMethod);
  }
  SUBCASE("invalid input data") {
    const std::string csv = write(dir / "nan.csv", "demo_id,t,x,y\na,0,0,0\na,1,nan,1\n");
    const Run r = run({"learn", "--demos", csv, "--out", dir.string()});
    CHECK(r.code == kExitInvalidInput);
    CHECK(r.err.find("nan.csv:3") != std::string::npos);
  }
}

TEST_CASE("learn is byte-for-byte deterministic") {
  const fs::path a = scratch("learn_a");
  const fs::path b = scratch("learn_b");
  for (const char* method : {"lfekmp", "tpgmm", "kmp"}) {
    REQUIRE(run({"learn", "--demos", kDemos, "--method", method, "--seed", "4", "--out", a.string()}).code == 0);
    REQUIRE(run({"learn", "--demos", kDemos, "--method", method, "--seed", "4", "--out", b.string()}).code == 0);
    CHECK(read_file(a / "model.json") == read_file(b / "model.json"));
    CHECK(to_string(model_kind(read_file(a / "model.json"))) == std::string(method));
  }
}

TEST_CASE("generalize to demo frames overlays the demos") {
  const fs::path dir = scratch("generalize");
  REQUIRE(run({"learn", "--demos", kDemos, "--out", dir.string()}).code == 0);
  const Run r = run({"generalize", "--model", (dir / "model.json").string(), "--frames", "demo:0", "--n-points",
                     "200", "--out", dir.string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("trajectory.csv") != std::string::npos);
  const DemoBundle demos = load_demo_csv(kDemos);
  const PoseTrajectory gen = load_trajectory_csv(dir / "trajectory.csv");
  REQUIRE(gen.size() == 200);
  PoseTrajectory mean = demos.demos.front();
  for (std::size_t i = 0; i < mean.size(); ++i) {
    Vec p = Vec::Zero(2);
    for (const auto& d : demos.demos) p += d.poses[i].position;
    mean.poses[i].position = p / static_cast<double>(demos.demos.size());
  }
  CHECK(test::relative_arc_rmse(gen, mean) <= 0.02);
  CHECK(fs::exists(dir / "distribution.json"));

  SUBCASE("frames from a JSON file") {
    const std::string frames = write(dir / "frames.json", task_parameters_to_json(demos.demo_frames.front()));
    CHECK(run({"generalize", "--model", (dir / "model.json").string(), "--frames", frames, "--out",
               (dir / "json").string()})
              .code == 0);
    CHECK(read_file(dir / "json" / "trajectory.csv") == read_file(dir / "trajectory.csv"));
  }
  SUBCASE("wrong frame count") {
    const std::string frames = write(dir / "one.json", R"([{"A": [[1,0],[0,1]], "b": [0, 0]}])");
    CHECK(run({"generalize", "--model", (dir / "model.json").string(), "--frames", frames, "--out", dir.string()})
              .code == kExitInvalidInput);
  }
}

TEST_CASE("benchmark output is deterministic and plots markers") {
  const fs::path a = scratch("bench_a");
  const fs::path b = scratch("bench_b");
  const std::string cfg = quick_config(a);
  REQUIRE(run({"benchmark", "--demos", kDemos, "--config", cfg, "--out", a.string()}).code == 0);
  REQUIRE(run({"benchmark", "--demos", kDemos, "--config", cfg, "--out", b.string()}).code == 0);
  CHECK(read_file(a / "metrics.json") == read_file(b / "metrics.json"));
  const auto j = nlohmann::json::parse(read_file(a / "metrics.json"));
  CHECK(j["methods"].size() == 3);
  const std::string svg = read_file(a / "benchmark.svg");
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("class=\"start\"") != std::string::npos);
  CHECK(svg.find("class=\"end\"") != std::string::npos);
  CHECK(svg.find(">+<") != std::string::npos);
  CHECK(svg.find(">*<") != std::string::npos);

  const fs::path c = scratch("bench_c");
  REQUIRE(run({"benchmark", "--demos", kDemos, "--config", cfg, "--seed", "1", "--out", c.string()}).code == 0);
  CHECK(read_file(a / "metrics.json") != read_file(c / "metrics.json"));
}

TEST_CASE("output directory precedence") {
  const fs::path base = scratch("precedence");
  const fs::path env_dir = base / "env";
  const fs::path cfg_dir = base / "cfg";
  const fs::path flag_dir = base / "flag";
  const std::string cfg = write(base / "cfg.json", nlohmann::json{{"output_dir", cfg_dir.string()}}.dump());
  ::setenv(kOutputDirEnv, env_dir.string().c_str(), 1);
  REQUIRE(run({"learn", "--demos", kDemos, "--config", cfg}).code == 0);
  CHECK(fs::exists(env_dir / "model.json"));
  CHECK_FALSE(fs::exists(cfg_dir / "model.json"));
  REQUIRE(run({"learn", "--demos", kDemos, "--config", cfg, "--out", flag_dir.string()}).code == 0);
  CHECK(fs::exists(flag_dir / "model.json"));
  ::unsetenv(kOutputDirEnv);
  REQUIRE(run({"learn", "--demos", kDemos, "--config", cfg}).code == 0);
  CHECK(fs::exists(cfg_dir / "model.json"));
}

TEST_CASE("extract, endpose and plot") {
  const fs::path dir = scratch("pouring");
  std::vector<std::string> args = {"extract"};
  for (int i = 0; i < 5; ++i) {
    args.push_back("--sequence");
    args.push_back(kData + "/pouring/pouring_sequence_" + std::to_string(i) + ".json");
  }
  args.push_back("--out");
  args.push_back(dir.string());
  REQUIRE(run(args).code == 0);
  const DemoBundle bundle = load_demo_csv(dir / "demos.csv");
  CHECK(bundle.demos.size() == 5);
  CHECK(bundle.dim() == 3);
  CHECK(bundle_from_json(read_file(dir / "bundle.json")).final_frames.size() == 5);

  const Run ep = run({"endpose", "--scenario", kData + "/pouring/pouring_scenario.json", "--out", dir.string()});
  REQUIRE(ep.code == 0);
  const EndposeResult r = endpose_from_json(read_file(dir / "terminal_pose.json"));
  CHECK(r.target.dim() == 3);

  REQUIRE(run({"plot", "--demos", kDemos, "--out", dir.string()}).code == 0);
  const std::string svg = read_file(dir / "plot.svg");
  CHECK(svg.find("class=\"start\"") != std::string::npos);
  CHECK(svg.find("class=\"end\"") != std::string::npos);
}

TEST_CASE("synthetic fixtures match the bundled data") {
  const fs::path dir = scratch("synth");
  REQUIRE(run({"synth", "gshape", "--seed", "7", "--out", dir.string()}).code == 0);
  CHECK(read_file(dir / "gshape_demos.csv") == read_file(kDemos));
  REQUIRE(run({"synth", "pouring", "--seed", "3", "--out", dir.string()}).code == 0);
  CHECK(read_file(dir / "pouring_scenario.json") == read_file(kData + "/pouring/pouring_scenario.json"));
  CHECK(read_file(dir / "pouring_sequence_2.json") == read_file(kData + "/pouring/pouring_sequence_2.json"));
}

TEST_CASE("atomic writes create parent directories") {
  const fs::path dir = scratch("atomic");
  write_file_atomic(dir / "a" / "b" / "c.txt", "hello");
  CHECK(read_file(dir / "a" / "b" / "c.txt") == "hello");
  write_file_atomic(dir / "a" / "b" / "c.txt", "again");
  CHECK(read_file(dir / "a" / "b" / "c.txt") == "again");
  std::size_t entries = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir / "a" / "b")) ++entries;
  CHECK(entries == 1);
}
