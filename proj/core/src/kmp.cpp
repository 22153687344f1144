#include "vlmp/kmp.hpp"

#include <cmath>

#include "vlmp/error.hpp"

namespace vlmp {

double KernelParams::operator()(double a, double b) const {
  const double d = a - b;
  return variance * std::exp(-0.5 * d * d / (lengthscale * lengthscale));
}

KmpModel::KmpModel(ReferenceTrajectory ref, KernelParams kernel, double lambda_mean, double lambda_cov)
    : ref_(std::move(ref)), kernel_(kernel), lambda_mean_(lambda_mean), lambda_cov_(lambda_cov) {
  if (ref_.size() < 1) throw Error(ErrorKind::InvalidArgument, "kmp_fit: empty reference trajectory");
  ref_.validate();
  if (!(lambda_mean_ > 0.0) || !(lambda_cov_ > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "kmp_fit: regularizers must be positive");
  }
  if (!(kernel_.lengthscale > 0.0) || !(kernel_.variance > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "kmp_fit: kernel lengthscale and variance must be positive");
  }
  out_ = ref_.output_dim();
  const auto n = static_cast<Eigen::Index>(ref_.size());
  const Eigen::Index o = out_;
  times_ = Eigen::Map<const Vec>(ref_.times.data(), n);

  Mat gram = Mat::Zero(n * o, n * o);
  Mat cov_blocks = Mat::Zero(n * o, n * o);
  Vec mu(n * o);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& s = ref_.states[static_cast<std::size_t>(i)];
    if (s.dim() != out_) throw Error(ErrorKind::DimensionMismatch, "kmp_fit: inconsistent output dimensions");
    mu.segment(i * o, o) = s.mean();
    cov_blocks.block(i * o, i * o, o, o) = s.cov();
    for (Eigen::Index j = 0; j < n; ++j) {
      const double kij = kernel_(times_[i], times_[j]);
      for (Eigen::Index d = 0; d < o; ++d) gram(i * o + d, j * o + d) = kij;
    }
  }

  const Mat mean_sys = gram + lambda_mean_ * cov_blocks;
  Eigen::LLT<Mat> mean_llt(mean_sys);
  if (mean_llt.info() != Eigen::Success) {
    throw Error(ErrorKind::Singular, "kmp_fit: mean system is not positive definite");
  }
  weights_ = mean_llt.solve(mu);
  // Iterative refinement; the anchored systems are badly conditioned.
  for (int it = 0; it < 2; ++it) weights_ += mean_llt.solve(mu - mean_sys * weights_);

  cov_llt_.compute(gram + lambda_cov_ * cov_blocks);
  if (cov_llt_.info() != Eigen::Success) {
    throw Error(ErrorKind::Singular, "kmp_fit: covariance system is not positive definite");
  }
}

Mat KmpModel::cross_kernel(double t) const {
  const Eigen::Index n = times_.size();
  const Eigen::Index o = out_;
  Mat kt = Mat::Zero(n * o, o);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double k = kernel_(t, times_[i]);
    for (Eigen::Index d = 0; d < o; ++d) kt(i * o + d, d) = k;
  }
  return kt;
}

Vec KmpModel::predict_mean(double t) const { return cross_kernel(t).transpose() * weights_; }

GaussianState KmpModel::predict(double t) const {
  const Mat kt = cross_kernel(t);
  Vec mean = kt.transpose() * weights_;
  const double scale = static_cast<double>(ref_.size()) / lambda_cov_;
  Mat cov = scale * (kernel_(t, t) * Mat::Identity(out_, out_) - kt.transpose() * cov_llt_.solve(kt));
  return {std::move(mean), std::move(cov)};
}

KmpModel kmp_fit(const ReferenceTrajectory& ref, const KernelParams& kernel, double lambda_mean,
                 double lambda_cov) {
  return KmpModel(ref, kernel, lambda_mean, lambda_cov);
}

ReferenceTrajectory kmp_predict(const KmpModel& model, const std::vector<double>& times) {
  ReferenceTrajectory out;
  out.times = times;
  out.states.reserve(times.size());
  out.extrapolated.assign(times.size(), false);
  for (double t : times) out.states.push_back(model.predict(t));
  return out;
}

KmpTuneResult kmp_tune(const ReferenceTrajectory& ref, const KernelGrid& grid, double lambda_mean,
                       double lambda_cov) {
  if (grid.lengthscales.empty() || grid.variances.empty()) {
    throw Error(ErrorKind::InvalidArgument, "kmp_tune: empty hyperparameter grid");
  }
  ref.validate();
  ReferenceTrajectory train;
  std::vector<std::size_t> held;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const bool interior = i > 0 && i + 1 < ref.size();
    if (ref.size() >= 4 && interior && i % 4 == 2) {
      held.push_back(i);
    } else {
      train.times.push_back(ref.times[i]);
      train.states.push_back(ref.states[i]);
      train.extrapolated.push_back(false);
    }
  }
  if (held.empty()) {
    // Too small to hold anything out; score in-sample.
    train = ref;
    for (std::size_t i = 0; i < ref.size(); ++i) held.push_back(i);
  }

  KmpTuneResult result;
  bool have_best = false;
  for (double ls : grid.lengthscales) {
    for (double var : grid.variances) {
      const KernelParams kp{ls, var};
      const KmpModel model(train, kp, lambda_mean, lambda_cov);
      double sq = 0.0;
      for (std::size_t i : held) sq += (model.predict_mean(ref.times[i]) - ref.states[i].mean()).squaredNorm();
      const double rmse = std::sqrt(sq / static_cast<double>(held.size()));
      result.scores.emplace_back(kp, rmse);
      if (!have_best || rmse < result.best_rmse ||
          (rmse == result.best_rmse && ls < result.best.lengthscale)) {
        result.best = kp;
        result.best_rmse = rmse;
        have_best = true;
      }
    }
  }
  return result;
}

}  // namespace vlmp
