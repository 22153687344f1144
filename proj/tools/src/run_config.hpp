#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vlmp/bridge.hpp"
#include "vlmp/lfekmp.hpp"
#include "vlmp/tpgmm.hpp"

namespace vlmp::cli {

/// Settings shared by every command, read from one JSON object. Unknown keys
/// and out-of-range values are rejected with ErrorKind::Config.
struct RunConfig {
  std::uint64_t seed = 0;

  // Encoding and KMP.
  int num_components = 5;
  int em_max_iter = 300;
  double cov_floor = 1e-8;
  double tpgmm_cov_floor = 1e-4;
  std::size_t n_reference = 100;
  bool tune_kernel = true;
  std::vector<double> kernel_lengthscales{0.02, 0.03, 0.05, 0.08, 0.12, 0.2};
  std::vector<double> kernel_variances{0.04};  // relative to the reference spread
  double kernel_lengthscale = 0.05;  // used when tune_kernel is false
  double kernel_variance = 0.04;
  double lambda_mean = 1.0;
  double lambda_cov = 60.0;

  // Local feature enhancement and fusion.
  double epsilon = 1e-8;
  int resample_count = 5;
  double window = 0.1;
  int num_frames = 2;
  bool anchors_in_all_frames = false;
  int orientation_iterations = 1;

  // Terminal pose estimation.
  double angle_step_deg = 2.0;
  double w_rot = 0.1;
  int n_pos_samples = 16;

  // Benchmark.
  int trials = 20;
  double translation_scale = 0.4;
  double rotation_scale = 0.1;
  std::size_t n_points = 200;

  std::string output_dir;

  void validate() const;
  LfeKmpConfig lfekmp() const;
  TpGmmOptions tpgmm() const;
  EndposeOptions endpose() const;
};

RunConfig parse_run_config(const std::string& json_text);
std::string run_config_to_json(const RunConfig& config);

}  // namespace vlmp::cli
