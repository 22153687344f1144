#include "vlmp/gmm.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "em_core.hpp"
#include "vlmp/error.hpp"

namespace vlmp {

GmmFit gmm_fit(const Mat& data, const GmmFitOptions& options) {
  if (data.rows() < 2) throw Error(ErrorKind::DimensionMismatch, "gmm_fit: need time plus at least one output row");
  const Mat frames[] = {data};
  detail::EmOptions em{options.num_components, options.seed, options.max_iter, options.tol, options.cov_floor};
  detail::EmResult r = detail::run_em(frames, em);

  GmmFit fit;
  fit.model.priors = std::move(r.priors);
  fit.model.means = std::move(r.means.front());
  fit.model.covs = std::move(r.covs.front());
  fit.model.seed = options.seed;
  fit.model.t_min = data.row(0).minCoeff();
  fit.model.t_max = data.row(0).maxCoeff();
  fit.log_likelihood = std::move(r.log_likelihood);
  fit.iterations = r.iterations;
  fit.floor_applied = r.floor_applied;
  return fit;
}

double gmm_log_likelihood(const GmmModel& model, const Mat& data) {
  double ll = 0.0;
  const int k = model.num_components();
  Vec logp(k);
  for (Eigen::Index i = 0; i < data.cols(); ++i) {
    for (int c = 0; c < k; ++c) {
      logp[c] = std::log(model.priors[c]) + detail::log_gaussian_density(data.col(i), model.means[c], model.covs[c]);
    }
    const double m = logp.maxCoeff();
    ll += m + std::log((logp.array() - m).exp().sum());
  }
  return ll;
}

void ReferenceTrajectory::validate() const {
  if (times.size() != states.size()) {
    throw Error(ErrorKind::DimensionMismatch, "reference trajectory: times and states differ in length");
  }
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) {
      throw Error(ErrorKind::InvalidArgument, "reference trajectory: times must be strictly increasing");
    }
  }
}

ReferenceTrajectory gmr_regress(const GmmModel& model, const std::vector<double>& query_times) {
  const int k = model.num_components();
  const int out = model.output_dim();
  if (k < 1 || out < 1) throw Error(ErrorKind::InvalidArgument, "gmr_regress: empty model");
  const double range = std::max(model.t_max - model.t_min, 0.0);
  const double margin = 0.1 * range;

  // Per-component conditioning terms are independent of the query.
  std::vector<Vec> gain(static_cast<std::size_t>(k));
  std::vector<Mat> cond_cov(static_cast<std::size_t>(k));
  for (int c = 0; c < k; ++c) {
    const Mat& s = model.covs[c];
    const double stt = s(0, 0);
    const Vec sot = s.block(1, 0, out, 1);
    gain[c] = sot / stt;
    cond_cov[c] = s.block(1, 1, out, out) - sot * sot.transpose() / stt;
  }

  ReferenceTrajectory ref;
  ref.times = query_times;
  ref.states.reserve(query_times.size());
  ref.extrapolated.reserve(query_times.size());
  Vec logh(k);
  for (double t_query : query_times) {
    double t = t_query;
    const bool far = t < model.t_min - margin || t > model.t_max + margin;
    if (far) t = std::clamp(t, model.t_min, model.t_max);
    for (int c = 0; c < k; ++c) {
      const double var = model.covs[c](0, 0);
      const double d = t - model.means[c][0];
      logh[c] = std::log(model.priors[c]) - 0.5 * (std::log(2.0 * std::numbers::pi * var) + d * d / var);
    }
    const double m = logh.maxCoeff();
    Vec h = (logh.array() - m).exp();
    h /= h.sum();

    std::vector<Vec> mus(static_cast<std::size_t>(k));
    Vec mean = Vec::Zero(out);
    for (int c = 0; c < k; ++c) {
      mus[c] = model.means[c].tail(out) + gain[c] * (t - model.means[c][0]);
      mean += h[c] * mus[c];
    }
    Mat cov = Mat::Zero(out, out);
    for (int c = 0; c < k; ++c) {
      const Vec d = mus[c] - mean;
      cov += h[c] * (cond_cov[c] + d * d.transpose());
    }
    ref.states.emplace_back(std::move(mean), std::move(cov));
    ref.extrapolated.push_back(far);
  }
  return ref;
}

std::vector<double> linspace(double t0, double t1, std::size_t n) {
  if (n < 2) throw Error(ErrorKind::InvalidArgument, "linspace: need at least two points");
  std::vector<double> out(n);
  const double step = (t1 - t0) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) out[i] = t0 + step * static_cast<double>(i);
  out.back() = t1;
  return out;
}

}  // namespace vlmp
