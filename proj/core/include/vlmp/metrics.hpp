#pragma once

#include "vlmp/lfekmp.hpp"

namespace vlmp {

struct MetricReport {
  double c_s = 0.0;             // topological similarity, percent
  double kappa_s = 0.0;         // mean discrete acceleration magnitude
  double endpoint_error = 0.0;  // max start/end deviation from the anchors
  std::size_t n_points = 0;
};

/// Positions resampled to `n` points equally spaced in arc length.
Mat resample_arc_length(const Mat& positions, std::size_t n);

/// Mean cosine between corresponding segment vectors, times 100. When the
/// point counts differ both trajectories are first resampled by arc length to
/// the larger count. A pair of zero-length segments counts as 1, a single
/// zero-length segment as 0.
double topological_similarity(const PoseTrajectory& gen, const PoseTrajectory& ref);
double topological_similarity(const Mat& gen, const Mat& ref);

/// (1/(N-2)) sum |x[t+1] - 2 x[t] + x[t-1]| / dt^2 over a uniformly sampled
/// trajectory (positions only).
double smoothness(const PoseTrajectory& traj);

/// max(|start - b_1|, |end - b_P|) for a generated trajectory and its frames.
double endpoint_error(const PoseTrajectory& gen, const TaskParameters& anchors);

MetricReport evaluate(const PoseTrajectory& gen, const PoseTrajectory& ref, const TaskParameters& anchors);

}  // namespace vlmp
