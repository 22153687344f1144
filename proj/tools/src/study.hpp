#pragma once

// Shape-preservation study: learn each method from a demo bundle, generalize
// to seeded perturbations of the mean start/end frames and score the results.

#include <string>
#include <vector>

#include "run_config.hpp"
#include "vlmp/data.hpp"
#include "vlmp/metrics.hpp"

namespace vlmp::cli {

inline const std::vector<std::string> kMethods = {"lfekmp", "tpgmm", "kmp"};

/// "all" expands to every method; anything else must name one method.
std::vector<std::string> resolve_methods(const std::string& method);

struct MethodSummary {
  std::string method;
  double c_s = 0.0;             // mean over trials
  double kappa_s = 0.0;         // mean over trials
  double endpoint_error = 0.0;  // mean over trials
  double endpoint_error_max = 0.0;
  std::vector<MetricReport> trials;
  PoseTrajectory first_trial;   // generated trajectory of trial 0, for plots
};

struct BenchmarkResult {
  double diameter = 0.0;
  std::vector<TaskParameters> task_frames;  // one per trial
  std::vector<std::uint64_t> trial_seeds;
  PoseTrajectory first_reference;           // c_s reference of trial 0
  std::vector<MethodSummary> methods;
};

/// Mean demo sampled at `n` evenly spaced normalized times.
PoseTrajectory mean_demo(const std::vector<PoseTrajectory>& demos, std::size_t n);

/// Requires 2D demos. Trial i perturbs the mean start/end frames with seed
/// derived from (config.seed, i); the c_s reference is the mean demo moved by
/// the rigid map taking the mean start frame onto the trial's start frame.
BenchmarkResult run_benchmark(const DemoBundle& bundle, const std::vector<std::string>& methods,
                              const RunConfig& config);

std::string benchmark_to_json(const BenchmarkResult& result, const RunConfig& config);

}  // namespace vlmp::cli
