#pragma once

// Task-parameterized GMM baseline: EM over frame-local projections of
// (time, position) with shared responsibilities, reproduction by a product
// of the frame-projected components followed by GMR over time.
// Orientation is not encoded; generalized trajectories carry the first new
// frame's rotation.

#include "vlmp/lfekmp.hpp"

namespace vlmp {

struct TpGmmModel {
  int num_components = 0;
  int dim = 0;
  std::uint64_t seed = 0;
  std::vector<double> priors;                 // shared across frames
  std::vector<std::vector<Vec>> means;        // [frame][component], joint (t, x)
  std::vector<std::vector<Mat>> covs;         // [frame][component]
  std::vector<double> log_likelihood;
  double t_min = 0.0;
  double t_max = 1.0;

  std::size_t num_frames() const { return means.size(); }
};

struct TpGmmOptions {
  int num_components = 5;
  std::uint64_t seed = 0;
  int max_iter = 300;
  double tol = 1e-10;
  /// Larger than the GMM default: products of nearly flat components are
  /// otherwise ill-conditioned.
  double cov_floor = 1e-4;
};

TpGmmModel tpgmm_learn(const std::vector<PoseTrajectory>& demos, const std::vector<TaskParameters>& demo_frames,
                       const TpGmmOptions& options);

/// Product of frame-projected components for the given new frames.
GmmModel tpgmm_fuse_components(const TpGmmModel& model, const TaskParameters& new_frames);

GeneralizedTrajectory tpgmm_generalize(const TpGmmModel& model, const TaskParameters& new_frames,
                                       const std::vector<double>& times);

}  // namespace vlmp
