#pragma once

#include <cstdint>
#include <vector>

#include "vlmp/gaussian.hpp"

namespace vlmp {

/// Mixture over the joint (time, output) space; dimension 0 is time.
struct GmmModel {
  std::vector<double> priors;
  std::vector<Vec> means;
  std::vector<Mat> covs;
  std::uint64_t seed = 0;
  /// Time support seen during fitting; used to flag extrapolated queries.
  double t_min = 0.0;
  double t_max = 1.0;

  int num_components() const { return static_cast<int>(priors.size()); }
  int joint_dim() const { return means.empty() ? 0 : static_cast<int>(means.front().size()); }
  int output_dim() const { return joint_dim() - 1; }
};

struct GmmFitOptions {
  int num_components = 5;
  std::uint64_t seed = 0;
  int max_iter = 300;
  /// Stop when the per-sample log-likelihood gain drops below tol.
  double tol = 1e-10;
  /// Eigenvalue floor relative to per-dimension data variance.
  double cov_floor = 1e-8;
};

struct GmmFit {
  GmmModel model;
  /// Log-likelihood evaluated before every M-step (and once at the end).
  std::vector<double> log_likelihood;
  int iterations = 0;
  /// Set when a component collapsed or a covariance needed the floor.
  bool floor_applied = false;
};

/// EM with k-means++ seeded initialization. `data` holds one sample per
/// column; row 0 is time.
GmmFit gmm_fit(const Mat& data, const GmmFitOptions& options);

double gmm_log_likelihood(const GmmModel& model, const Mat& data);

/// Per-time Gaussian distribution over output dims.
struct ReferenceTrajectory {
  std::vector<double> times;
  std::vector<GaussianState> states;
  /// One entry per time; true when the query fell far outside the fitted
  /// time support and was conditioned at the nearest support boundary.
  std::vector<bool> extrapolated;

  std::size_t size() const { return times.size(); }
  int output_dim() const { return states.empty() ? 0 : states.front().dim(); }
  /// Throws unless times are strictly increasing and match the states.
  void validate() const;
};

ReferenceTrajectory gmr_regress(const GmmModel& model, const std::vector<double>& query_times);

/// Evenly spaced grid on [t0, t1] with n >= 2 points; endpoints exact.
std::vector<double> linspace(double t0, double t1, std::size_t n);

}  // namespace vlmp
