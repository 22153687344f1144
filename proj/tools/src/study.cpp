#include "study.hpp"

#include <algorithm>
#include <functional>
#include <memory>

#include "json.hpp"
#include "vlmp/error.hpp"

namespace vlmp::cli {
namespace {

using json = nlohmann::json;

Vec interpolate_position(const PoseTrajectory& traj, double t) {
  const auto& ts = traj.times;
  if (t <= ts.front()) return traj.poses.front().position;
  if (t >= ts.back()) return traj.poses.back().position;
  const auto hi = static_cast<std::size_t>(std::lower_bound(ts.begin(), ts.end(), t) - ts.begin());
  const double a = (t - ts[hi - 1]) / (ts[hi] - ts[hi - 1]);
  return (1.0 - a) * traj.poses[hi - 1].position + a * traj.poses[hi].position;
}

std::uint64_t trial_seed(std::uint64_t seed, int trial) {
  return seed * 1000003ULL + 1000ULL + static_cast<std::uint64_t>(trial);
}

TaskParameters limit_frames(const TaskParameters& t, int num_frames) {
  TaskParameters out = t;
  if (num_frames == 1) out.frames.resize(1);
  return out;
}

}  // namespace

std::vector<std::string> resolve_methods(const std::string& method) {
  if (method == "all") return kMethods;
  if (std::find(kMethods.begin(), kMethods.end(), method) == kMethods.end()) {
    throw Error(ErrorKind::InvalidArgument, "unknown method '" + method + "' (expected kmp, tpgmm, lfekmp or all)");
  }
  return {method};
}

PoseTrajectory mean_demo(const std::vector<PoseTrajectory>& demos, std::size_t n) {
  if (demos.empty()) throw Error(ErrorKind::InvalidArgument, "mean_demo: no demos");
  PoseTrajectory out;
  out.times = linspace(0.0, 1.0, n);
  for (double t : out.times) {
    Vec acc = Vec::Zero(demos.front().dim());
    for (const auto& d : demos) acc += interpolate_position(d, t);
    out.poses.emplace_back(Vec(acc / static_cast<double>(demos.size())));
  }
  return out;
}

BenchmarkResult run_benchmark(const DemoBundle& bundle, const std::vector<std::string>& methods,
                              const RunConfig& config) {
  config.validate();
  bundle.validate();
  if (bundle.dim() != 2) throw Error(ErrorKind::DimensionMismatch, "benchmark expects 2D demos");

  const TaskParameters base = mean_endpoint_frames(bundle.demos);
  const std::vector<double> times = linspace(0.0, 1.0, config.n_points);
  const PoseTrajectory mean = mean_demo(bundle.demos, config.n_points);
  std::vector<TaskParameters> demo_frames;
  for (const auto& f : bundle.demo_frames) demo_frames.push_back(limit_frames(f, config.num_frames));

  BenchmarkResult result;
  result.diameter = workspace_diameter(bundle.demos);
  std::vector<PoseTrajectory> references;
  for (int i = 0; i < config.trials; ++i) {
    const std::uint64_t seed = trial_seed(config.seed, i);
    const TaskParameters frames = perturb_task(base, seed, config.translation_scale, config.rotation_scale, result.diameter);
    const TaskFrame carry = frame_compose(frames.frames.front(), frame_invert(base.frames.front()));
    references.push_back(frame_apply(carry, mean));
    result.task_frames.push_back(frames);
    result.trial_seeds.push_back(seed);
  }
  result.first_reference = references.front();

  const LfeKmpConfig lfe_config = config.lfekmp();
  for (const auto& method : methods) {
    MethodSummary summary;
    summary.method = method;
    std::function<GeneralizedTrajectory(const TaskParameters&)> generalize;
    if (method == "lfekmp") {
      auto model = std::make_shared<LfeKmpModel>(lfekmp_learn(bundle.demos, demo_frames, lfe_config));
      generalize = [model, &times, &config](const TaskParameters& f) {
        return lfekmp_generalize(*model, limit_frames(f, config.num_frames), times);
      };
    } else if (method == "tpgmm") {
      auto model = std::make_shared<TpGmmModel>(tpgmm_learn(bundle.demos, demo_frames, config.tpgmm()));
      generalize = [model, &times, &config](const TaskParameters& f) {
        return tpgmm_generalize(*model, limit_frames(f, config.num_frames), times);
      };
    } else if (method == "kmp") {
      auto model = std::make_shared<KmpBaselineModel>(kmp_baseline_learn(bundle.demos, lfe_config));
      generalize = [model, &times](const TaskParameters& f) { return kmp_baseline_generalize(*model, f, times); };
    } else {
      resolve_methods(method);
    }
    for (std::size_t i = 0; i < result.task_frames.size(); ++i) {
      const GeneralizedTrajectory g = generalize(result.task_frames[i]);
      const MetricReport r = evaluate(g.executed, references[i], result.task_frames[i]);
      summary.trials.push_back(r);
      if (i == 0) summary.first_trial = g.executed;
    }
    const double n = static_cast<double>(summary.trials.size());
    for (const auto& r : summary.trials) {
      summary.c_s += r.c_s / n;
      summary.kappa_s += r.kappa_s / n;
      summary.endpoint_error += r.endpoint_error / n;
      summary.endpoint_error_max = std::max(summary.endpoint_error_max, r.endpoint_error);
    }
    result.methods.push_back(std::move(summary));
  }
  return result;
}

std::string benchmark_to_json(const BenchmarkResult& result, const RunConfig& config) {
  json methods = json::array();
  for (const auto& m : result.methods) {
    json trials = json::array();
    for (std::size_t i = 0; i < m.trials.size(); ++i) {
      const auto& r = m.trials[i];
      trials.push_back({{"seed", result.trial_seeds[i]},
                        {"c_s", r.c_s},
                        {"kappa_s", r.kappa_s},
                        {"endpoint_error", r.endpoint_error},
                        {"n_points", r.n_points}});
    }
    methods.push_back({{"method", m.method},
                       {"c_s", m.c_s},
                       {"kappa_s", m.kappa_s},
                       {"endpoint_error", m.endpoint_error},
                       {"endpoint_error_max", m.endpoint_error_max},
                       {"trials", trials}});
  }
  json j{{"workspace_diameter", result.diameter},
         {"trials", config.trials},
         {"translation_scale", config.translation_scale},
         {"rotation_scale", config.rotation_scale},
         {"seed", config.seed},
         {"methods", methods}};
  return j.dump(2) + "\n";
}

}  // namespace vlmp::cli
