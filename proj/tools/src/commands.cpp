#include "commands.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "run_config.hpp"
#include "study.hpp"
#include "svg.hpp"
#include "vlmp/data.hpp"
#include "vlmp/error.hpp"
#include "vlmp/serialization.hpp"

#if defined(__unix__) || defined(__APPLE__)
#include <unistd.h>
#endif

namespace vlmp::cli {
namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

struct UnknownMethod : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
};

struct Context {
  RunConfig config;
  fs::path out_dir;
  std::vector<std::string> written;

  fs::path emit(const std::string& name, const std::string& content) {
    const fs::path path = out_dir / name;
    write_file_atomic(path, content);
    written.push_back(path.string());
    return path;
  }
};

Context make_context(const CommonOptions& opts) {
  Context ctx;
  if (!opts.config_path.empty()) ctx.config = parse_run_config(read_file(opts.config_path));
  if (opts.seed) ctx.config.seed = *opts.seed;
  ctx.config.validate();
  if (!opts.out_dir.empty()) {
    ctx.out_dir = opts.out_dir;
  } else if (const char* env = std::getenv(kOutputDirEnv); env && *env) {
    ctx.out_dir = env;
  } else if (!ctx.config.output_dir.empty()) {
    ctx.out_dir = ctx.config.output_dir;
  } else {
    ctx.out_dir = ".";
  }
  return ctx;
}

void check_method(const std::string& method, bool allow_all) {
  if (allow_all && method == "all") return;
  if (std::find(kMethods.begin(), kMethods.end(), method) == kMethods.end()) {
    throw UnknownMethod("unknown method '" + method + "' (expected kmp, tpgmm, lfekmp" +
                        (allow_all ? std::string(" or all") : std::string()) + ")");
  }
}

bool has_extension(const fs::path& p, const char* ext) { return p.extension() == ext; }

DemoBundle load_bundle(const fs::path& path) {
  if (has_extension(path, ".csv")) return load_demo_csv(path);
  if (has_extension(path, ".json")) return bundle_from_json(read_file(path));
  throw Error(ErrorKind::Parse, "'" + path.string() + "': demos must be a .csv or bundle .json file");
}

std::vector<TaskParameters> frames_for(const DemoBundle& b, int num_frames) {
  std::vector<TaskParameters> out = b.demo_frames;
  if (num_frames == 1) {
    for (auto& t : out) t.frames.resize(1);
  }
  return out;
}

std::string format_number(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

std::string trajectory_csv(const PoseTrajectory& traj) {
  const int d = traj.dim();
  std::string out = d == 3 ? "t,x,y,z,qw,qx,qy,qz\n" : (d == 2 ? "t,x,y\n" : "t,x\n");
  for (std::size_t i = 0; i < traj.size(); ++i) {
    out += format_number(traj.times[i]);
    for (int k = 0; k < d; ++k) out += "," + format_number(traj.poses[i].position[k]);
    if (d == 3) {
      const Eigen::Vector4d q = traj.poses[i].orientation.coeffs_wxyz();
      for (int k = 0; k < 4; ++k) out += "," + format_number(q[k]);
    }
    out += "\n";
  }
  return out;
}

PoseTrajectory load_trajectory(const fs::path& path) {
  if (has_extension(path, ".json")) return pose_trajectory_from_json(read_file(path));
  // Trajectory CSV shares the demo CSV columns minus demo_id.
  std::istringstream in(read_file(path));
  std::string header;
  std::getline(in, header);
  std::string text = "demo_id," + header + "\n";
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) text += "0," + line + "\n";
  }
  DemoBundle b = parse_demo_csv(text, path.string());
  return b.demos.front();
}

TaskParameters resolve_frames(const std::string& spec, const std::string& model_text, ModelKind kind,
                              const std::string& demos_path, int num_frames) {
  if (spec.rfind("demo:", 0) == 0) {
    std::size_t index = 0;
    try {
      index = std::stoul(spec.substr(5));
    } catch (const std::exception&) {
      throw UsageError("--frames: expected demo:<index>, got '" + spec + "'");
    }
    std::vector<TaskParameters> frames;
    if (kind == ModelKind::LfeKmp) {
      frames = lfekmp_model_from_json(model_text).demo_frames;
    } else if (!demos_path.empty()) {
      frames = frames_for(load_bundle(demos_path), num_frames);
    } else {
      throw UsageError("--frames demo:<index> needs --demos for " + std::string(to_string(kind)) + " models");
    }
    if (index >= frames.size()) throw UsageError("--frames: demo index " + std::to_string(index) + " out of range");
    return frames[index];
  }
  return task_parameters_from_json(read_file(spec));
}

void add_common(CLI::App* sub, CommonOptions& opts) {
  sub->add_option("--config", opts.config_path, "Run configuration JSON");
  sub->add_option("--seed", opts.seed, "Seed (overrides the config)");
  sub->add_option("--out", opts.out_dir, "Output directory (overrides $VLMP_OUTPUT_DIR and the config)");
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config: return kExitConfig;
    case ErrorKind::Io: return kExitIo;
    case ErrorKind::Parse:
    case ErrorKind::InvalidArgument:
    case ErrorKind::DimensionMismatch: return kExitInvalidInput;
    case ErrorKind::Singular:
    case ErrorKind::Degenerate: return kExitNumerical;
  }
  return kExitInternal;
}

void report_error(std::ostream& err, int code, const std::string& kind, const std::string& message) {
  err << json{{"error", {{"code", code}, {"kind", kind}, {"message", message}}}}.dump() << "\n";
}

}  // namespace

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorKind::Io, "failed reading '" + path.string() + "'");
  return ss.str();
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw Error(ErrorKind::Io, "cannot create directory '" + path.parent_path().string() + "': " + ec.message());
  }
  long pid = 0;
#if defined(__unix__) || defined(__APPLE__)
  pid = static_cast<long>(::getpid());
#endif
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(pid);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) {
      out.close();
      fs::remove(tmp, ec);
      throw Error(ErrorKind::Io, "failed writing '" + tmp.string() + "'");
    }
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignored;
    fs::remove(tmp, ignored);
    throw Error(ErrorKind::Io, "cannot rename onto '" + path.string() + "': " + ec.message());
  }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Keypoint-constrained movement primitives: learn, generalize and evaluate trajectories", "vlmp"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  CommonOptions common;
  std::string method = "lfekmp";
  std::string bench_method = "all";
  std::string demos_path;
  std::string model_path;
  std::string frames_spec;
  std::string scenario_path;
  std::vector<std::string> sequences;
  std::vector<std::string> trajectories;
  std::optional<std::size_t> n_points;
  std::string synth_kind;
  std::size_t synth_count = 0;

  auto* learn = app.add_subcommand("learn", "Learn a model from demonstrations (writes model.json)");
  learn->add_option("--demos", demos_path, "Demo CSV or bundle JSON")->required();
  learn->add_option("--method", method, "lfekmp, tpgmm or kmp");
  add_common(learn, common);

  auto* generalize = app.add_subcommand("generalize", "Generalize a model to new task frames");
  generalize->add_option("--model", model_path, "Model JSON from 'learn'")->required();
  generalize->add_option("--frames", frames_spec, "Task frames JSON, or demo:<index>")->required();
  generalize->add_option("--demos", demos_path, "Demos, for demo:<index> with non-lfekmp models");
  generalize->add_option("--n-points", n_points, "Number of output samples");
  add_common(generalize, common);

  auto* endpose = app.add_subcommand("endpose", "Estimate the terminal pose for a scenario");
  endpose->add_option("--scenario", scenario_path, "Scenario JSON")->required();
  add_common(endpose, common);

  auto* extract = app.add_subcommand("extract", "Turn keypoint sequences into demos (demos.csv, bundle.json)");
  extract->add_option("--sequence", sequences, "Keypoint sequence JSON (repeatable)")->required();
  add_common(extract, common);

  auto* bench = app.add_subcommand("benchmark", "Shape-preservation benchmark (metrics.json, benchmark.svg)");
  bench->add_option("--demos", demos_path, "2D demo CSV or bundle JSON")->required();
  bench->add_option("--method", bench_method, "kmp, tpgmm, lfekmp or all")->capture_default_str();
  add_common(bench, common);

  auto* plot = app.add_subcommand("plot", "Plot demos and trajectories (plot.svg)");
  plot->add_option("--demos", demos_path, "Demo CSV or bundle JSON");
  plot->add_option("--trajectory", trajectories, "Trajectory CSV or JSON (repeatable)");
  add_common(plot, common);

  auto* synth = app.add_subcommand("synth", "Write synthetic fixtures (gshape or pouring)");
  synth->add_option("kind", synth_kind, "gshape or pouring")->required()->check(CLI::IsMember({"gshape", "pouring"}));
  synth->add_option("--count", synth_count, "Number of demos (default 6 for gshape, 5 for pouring)");
  add_common(synth, common);

  std::vector<std::string> argv_rest(args.begin() + (args.empty() ? 0 : 1), args.end());
  std::reverse(argv_rest.begin(), argv_rest.end());
  try {
    app.parse(argv_rest);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    report_error(err, kExitUsage, "usage", e.what());
    return kExitUsage;
  }

  try {
    Context ctx = make_context(common);
    const RunConfig& cfg = ctx.config;

    if (learn->parsed()) {
      check_method(method, false);
      const DemoBundle bundle = load_bundle(demos_path);
      const auto frames = frames_for(bundle, cfg.num_frames);
      std::string text;
      if (method == "lfekmp") {
        text = to_json(lfekmp_learn(bundle.demos, frames, cfg.lfekmp()));
      } else if (method == "tpgmm") {
        text = to_json(tpgmm_learn(bundle.demos, frames, cfg.tpgmm()));
      } else {
        text = to_json(kmp_baseline_learn(bundle.demos, cfg.lfekmp()));
      }
      ctx.emit("model.json", text);
    } else if (generalize->parsed()) {
      const std::string model_text = read_file(model_path);
      const ModelKind kind = model_kind(model_text);
      const TaskParameters frames = resolve_frames(frames_spec, model_text, kind, demos_path, cfg.num_frames);
      const auto times = linspace(0.0, 1.0, n_points.value_or(cfg.n_points));
      GeneralizedTrajectory g;
      switch (kind) {
        case ModelKind::LfeKmp: g = lfekmp_generalize(lfekmp_model_from_json(model_text), frames, times); break;
        case ModelKind::TpGmm: g = tpgmm_generalize(tpgmm_model_from_json(model_text), frames, times); break;
        case ModelKind::Kmp: g = kmp_baseline_generalize(kmp_model_from_json(model_text), frames, times); break;
      }
      ctx.emit("trajectory.csv", trajectory_csv(g.executed));
      ctx.emit("distribution.json", trajectory_to_json(g));
    } else if (endpose->parsed()) {
      const Scenario scenario = scenario_from_json(read_file(scenario_path));
      const InteractionStats stats = scenario.stats ? *scenario.stats : learn_interaction_stats(scenario.final_frames);
      const EndposeResult r = endpose_estimate(scenario.master, stats, scenario.start, cfg.endpose());
      ctx.emit("terminal_pose.json", endpose_to_json(r));
    } else if (extract->parsed()) {
      std::vector<PoseTrajectory> demos;
      std::vector<FinalFrame> finals;
      for (const auto& path : sequences) {
        const ExtractedDemo ex = extract_demo_trajectory(keypoint_sequence_from_json(read_file(path)));
        demos.push_back(ex.trajectory);
        if (ex.final_master) finals.push_back({*ex.final_master, ex.final_slave});
      }
      if (!finals.empty() && finals.size() != demos.size()) {
        throw Error(ErrorKind::InvalidArgument, "either every sequence or none must end with a master object");
      }
      DemoBundle bundle = make_bundle(std::move(demos), std::move(finals));
      bundle.source = sequences.front();
      ctx.emit("demos.csv", format_demo_csv(bundle));
      ctx.emit("bundle.json", bundle_to_json(bundle));
    } else if (bench->parsed()) {
      check_method(bench_method, true);
      const DemoBundle bundle = load_bundle(demos_path);
      const BenchmarkResult result = run_benchmark(bundle, resolve_methods(bench_method), cfg);
      ctx.emit("metrics.json", benchmark_to_json(result, cfg));
      static const std::map<std::string, std::string> colors = {
          {"lfekmp", "#d62728"}, {"tpgmm", "#1f77b4"}, {"kmp", "#2ca02c"}};
      std::vector<PlotSeries> series;
      series.push_back({"demos", "#bbbbbb", bundle.demos, 1.0, false});
      series.push_back({"reference", "#555555", {result.first_reference}, 1.0, true});
      for (const auto& m : result.methods) series.push_back({m.method, colors.at(m.method), {m.first_trial}, 1.8, false});
      ctx.emit("benchmark.svg", render_svg(series, "Shape preservation, trial 0"));
    } else if (plot->parsed()) {
      std::vector<PlotSeries> series;
      if (!demos_path.empty()) series.push_back({"demos", "#999999", load_bundle(demos_path).demos, 1.0, false});
      static const char* palette[] = {"#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e"};
      for (std::size_t i = 0; i < trajectories.size(); ++i) {
        series.push_back({fs::path(trajectories[i]).filename().string(), palette[i % 5], {load_trajectory(trajectories[i])}, 1.8, false});
      }
      if (series.empty()) throw UsageError("plot needs --demos or --trajectory");
      ctx.emit("plot.svg", render_svg(series, "Trajectories"));
    } else if (synth->parsed()) {
      if (synth_kind == "gshape") {
        const auto demos = synth::gshape_demos(synth_count ? synth_count : 6, cfg.seed);
        DemoBundle b;
        for (std::size_t i = 0; i < demos.size(); ++i) {
          b.demos.push_back(demos[i]);
          b.demo_ids.push_back("g" + std::to_string(i));
        }
        ctx.emit("gshape_demos.csv", format_demo_csv(b));
      } else {
        const auto demos = synth::pouring_demos(synth_count ? synth_count : 5, cfg.seed);
        std::vector<FinalFrame> finals;
        for (std::size_t i = 0; i < demos.size(); ++i) {
          ctx.emit("pouring_sequence_" + std::to_string(i) + ".json", keypoint_sequence_to_json(demos[i].sequence));
          const auto& last = demos[i].sequence.frames.back();
          finals.push_back({*last.master, last.slave});
        }
        const synth::PouringScene scene = synth::pouring_scene(cfg.seed + 1);
        ctx.emit("pouring_scenario.json", scenario_to_json(Scenario{scene.master, scene.start, std::nullopt, finals}));
      }
    }
    out << json{{"written", ctx.written}}.dump() << "\n";
    return kExitOk;
  } catch (const UnknownMethod& e) {
    report_error(err, kExitUnknownMethod, "unknown_method", e.what());
    return kExitUnknownMethod;
  } catch (const UsageError& e) {
    report_error(err, kExitUsage, "usage", e.what());
    return kExitUsage;
  } catch (const Error& e) {
    const int code = exit_code_for(e.kind());
    report_error(err, code, to_string(e.kind()), e.what());
    return code;
  } catch (const std::exception& e) {
    report_error(err, kExitInternal, "internal", e.what());
    return kExitInternal;
  }
}

}  // namespace vlmp::cli
