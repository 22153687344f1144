#pragma once

#include <Eigen/Cholesky>
#include <vector>

#include "vlmp/gmm.hpp"

namespace vlmp {

/// Squared-exponential kernel k(t, t') = variance * exp(-(t - t')^2 / (2 l^2)).
struct KernelParams {
  double lengthscale = 0.05;
  double variance = 1.0;

  double operator()(double a, double b) const;
};

/// Kernelized movement primitive fitted to a reference trajectory.
///
/// Predictions use the closed-form minimizer of the KL divergence to the
/// reference:
///   mean(t) = k(t) (K + lambda_mean S)^-1 mu
///   cov(t)  = N / lambda_cov * (k(t,t) I - k(t) (K + lambda_cov S)^-1 k(t)^T)
/// where K is the block Gram matrix k(t_i, t_j) I_O and S the block-diagonal
/// reference covariance.
class KmpModel {
 public:
  KmpModel(ReferenceTrajectory ref, KernelParams kernel, double lambda_mean, double lambda_cov);

  const ReferenceTrajectory& reference() const { return ref_; }
  const KernelParams& kernel() const { return kernel_; }
  double lambda_mean() const { return lambda_mean_; }
  double lambda_cov() const { return lambda_cov_; }
  int output_dim() const { return out_; }

  Vec predict_mean(double t) const;
  GaussianState predict(double t) const;

 private:
  Mat cross_kernel(double t) const;  // NO x O block column k(t)^T

  ReferenceTrajectory ref_;
  KernelParams kernel_;
  double lambda_mean_;
  double lambda_cov_;
  int out_ = 0;
  Vec times_;
  Vec weights_;              // (K + lambda_mean S)^-1 mu
  Eigen::LLT<Mat> cov_llt_;  // K + lambda_cov S
};

KmpModel kmp_fit(const ReferenceTrajectory& ref, const KernelParams& kernel, double lambda_mean,
                 double lambda_cov);

ReferenceTrajectory kmp_predict(const KmpModel& model, const std::vector<double>& times);

struct KernelGrid {
  std::vector<double> lengthscales;
  std::vector<double> variances = {1.0};
};

struct KmpTuneResult {
  KernelParams best;
  double best_rmse = 0.0;
  /// Every evaluated candidate with its held-out RMSE, in grid order.
  std::vector<std::pair<KernelParams, double>> scores;
};

/// Grid search minimizing held-out RMSE of predicted means: every fourth
/// interior reference point is held out and predicted from the rest. Ties
/// go to the smaller lengthscale.
KmpTuneResult kmp_tune(const ReferenceTrajectory& ref, const KernelGrid& grid, double lambda_mean,
                       double lambda_cov);

}  // namespace vlmp
