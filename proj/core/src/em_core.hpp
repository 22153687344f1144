#pragma once

// EM over one or more frame-local projections of the same samples with
// shared responsibilities. A single frame is an ordinary GMM; several frames
// give the task-parameterized variant.

#include <cstdint>
#include <span>
#include <vector>

#include "vlmp/manifold.hpp"

namespace vlmp::detail {

struct EmResult {
  std::vector<double> priors;
  std::vector<std::vector<Vec>> means;  // [frame][component]
  std::vector<std::vector<Mat>> covs;   // [frame][component]
  std::vector<double> log_likelihood;
  int iterations = 0;
  bool floor_applied = false;
};

struct EmOptions {
  int num_components = 1;
  std::uint64_t seed = 0;
  int max_iter = 300;
  double tol = 1e-10;
  double cov_floor = 1e-8;
};

EmResult run_em(std::span<const Mat> frames, const EmOptions& options);

double log_gaussian_density(const Vec& x, const Vec& mean, const Mat& cov);

}  // namespace vlmp::detail
