#include "em_core.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "vlmp/error.hpp"

namespace vlmp::detail {
namespace {

struct Factor {
  Eigen::LLT<Mat> llt;
  double log_norm = 0.0;  // -0.5 * (d log 2pi + log det)
};

Factor factor(const Mat& cov) {
  Factor f;
  f.llt.compute(cov);
  if (f.llt.info() != Eigen::Success) {
    throw Error(ErrorKind::Singular, "EM: component covariance is not positive definite");
  }
  const Mat& l = f.llt.matrixLLT();
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < l.rows(); ++i) log_det += 2.0 * std::log(l(i, i));
  f.log_norm = -0.5 * (static_cast<double>(cov.rows()) * std::log(2.0 * std::numbers::pi) + log_det);
  return f;
}

double log_density(const Factor& f, const Vec& x, const Vec& mean) {
  const Vec diff = x - mean;
  const Vec y = f.llt.matrixL().solve(diff);
  return f.log_norm - 0.5 * y.squaredNorm();
}

Vec row_variances(const Mat& data) {
  const double n = static_cast<double>(data.cols());
  const Vec mean = data.rowwise().mean();
  Vec var = (data.colwise() - mean).array().square().rowwise().sum().matrix() / n;
  const double scale = std::max(var.maxCoeff(), 1e-300);
  for (Eigen::Index i = 0; i < var.size(); ++i) var[i] = std::max(var[i], 1e-12 * scale);
  return var;
}

// Clamps the eigenvalues of S^-1 cov S^-1 from below at `floor`, where S is
// the per-dimension data standard deviation. This is the likelihood maximizer
// over the floored set, so EM stays monotone. Returns true when it had to.
bool apply_floor(Mat& cov, const Vec& var, double floor) {
  cov = 0.5 * (cov + cov.transpose()).eval();
  const Vec sd = var.cwiseSqrt();
  const Vec inv_sd = sd.cwiseInverse();
  const Mat scaled = inv_sd.asDiagonal() * cov * inv_sd.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Mat> es(scaled);
  if (es.eigenvalues().minCoeff() >= floor) return false;
  const Vec clamped = es.eigenvalues().cwiseMax(floor);
  const Mat fixed = es.eigenvectors() * clamped.asDiagonal() * es.eigenvectors().transpose();
  cov = sd.asDiagonal() * fixed * sd.asDiagonal();
  cov = 0.5 * (cov + cov.transpose()).eval();
  return true;
}

double log_sum_exp(const Vec& v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.array() - m).exp().sum());
}

// k-means++ seeding followed by Lloyd iterations on standardized data.
std::vector<int> kmeans_assign(const Mat& stacked, int k, std::uint64_t seed) {
  const Eigen::Index n = stacked.cols();
  const Vec mean = stacked.rowwise().mean();
  Vec sd = ((stacked.colwise() - mean).array().square().rowwise().sum() / static_cast<double>(n)).sqrt();
  for (Eigen::Index i = 0; i < sd.size(); ++i) sd[i] = sd[i] > 0.0 ? sd[i] : 1.0;
  const Mat z = sd.cwiseInverse().asDiagonal() * (stacked.colwise() - mean);

  std::mt19937_64 rng(seed);
  std::vector<Eigen::Index> centers_idx;
  centers_idx.push_back(static_cast<Eigen::Index>(std::uniform_int_distribution<Eigen::Index>(0, n - 1)(rng)));
  Vec d2 = (z.colwise() - z.col(centers_idx[0])).colwise().squaredNorm().transpose();
  while (static_cast<int>(centers_idx.size()) < k) {
    const double total = d2.sum();
    Eigen::Index pick = 0;
    if (total > 0.0) {
      double r = std::uniform_real_distribution<double>(0.0, total)(rng);
      for (pick = 0; pick < n - 1; ++pick) {
        r -= d2[pick];
        if (r < 0.0) break;
      }
    } else {
      pick = std::uniform_int_distribution<Eigen::Index>(0, n - 1)(rng);
    }
    centers_idx.push_back(pick);
    d2 = d2.cwiseMin((z.colwise() - z.col(pick)).colwise().squaredNorm().transpose());
  }

  Mat centers(z.rows(), k);
  for (int c = 0; c < k; ++c) centers.col(c) = z.col(centers_idx[static_cast<std::size_t>(c)]);
  std::vector<int> assign(static_cast<std::size_t>(n), -1);
  for (int iter = 0; iter < 50; ++iter) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::Index best = 0;
      (centers.colwise() - z.col(i)).colwise().squaredNorm().minCoeff(&best);
      if (assign[static_cast<std::size_t>(i)] != static_cast<int>(best)) {
        assign[static_cast<std::size_t>(i)] = static_cast<int>(best);
        changed = true;
      }
    }
    if (!changed) break;
    Mat sums = Mat::Zero(z.rows(), k);
    Vec counts = Vec::Zero(k);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.col(assign[static_cast<std::size_t>(i)]) += z.col(i);
      counts[assign[static_cast<std::size_t>(i)]] += 1.0;
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0.0) centers.col(c) = sums.col(c) / counts[c];
    }
  }
  return assign;
}

}  // namespace

double log_gaussian_density(const Vec& x, const Vec& mean, const Mat& cov) {
  return log_density(factor(cov), x, mean);
}

EmResult run_em(std::span<const Mat> frames, const EmOptions& opt) {
  if (frames.empty()) throw Error(ErrorKind::InvalidArgument, "EM: no data frames");
  const int k = opt.num_components;
  const Eigen::Index n = frames.front().cols();
  if (k < 1) throw Error(ErrorKind::InvalidArgument, "EM: number of components must be >= 1");
  Eigen::Index stacked_rows = 0;
  for (const auto& f : frames) {
    if (f.cols() != n) throw Error(ErrorKind::DimensionMismatch, "EM: frames hold different sample counts");
    if (!f.allFinite()) throw Error(ErrorKind::InvalidArgument, "EM: data contains NaN or Inf");
    stacked_rows += f.rows();
  }
  const Eigen::Index d0 = frames.front().rows();
  if (n < static_cast<Eigen::Index>(k) * (d0 + 1)) {
    throw Error(ErrorKind::InvalidArgument, "EM: need at least K*(dim+1) samples");
  }

  Mat stacked(stacked_rows, n);
  {
    Eigen::Index r = 0;
    for (const auto& f : frames) {
      stacked.middleRows(r, f.rows()) = f;
      r += f.rows();
    }
  }
  {
    const Vec mean = stacked.rowwise().mean();
    if ((stacked.colwise() - mean).cwiseAbs().maxCoeff() == 0.0) {
      throw Error(ErrorKind::Degenerate, "EM: all data points are identical");
    }
  }

  const std::size_t num_frames = frames.size();
  std::vector<Vec> variances;
  for (const auto& f : frames) variances.push_back(row_variances(f));

  EmResult res;
  res.priors.assign(static_cast<std::size_t>(k), 0.0);
  res.means.assign(num_frames, std::vector<Vec>(static_cast<std::size_t>(k)));
  res.covs.assign(num_frames, std::vector<Mat>(static_cast<std::size_t>(k)));

  // Initial parameters from hard k-means assignments.
  const std::vector<int> assign = kmeans_assign(stacked, k, opt.seed);
  Mat gamma = Mat::Zero(n, k);
  for (Eigen::Index i = 0; i < n; ++i) gamma(i, assign[static_cast<std::size_t>(i)]) = 1.0;

  auto m_step = [&](const Mat& resp) {
    const Vec nk = resp.colwise().sum().transpose();
    for (int c = 0; c < k; ++c) {
      const double weight = nk[c];
      res.priors[static_cast<std::size_t>(c)] = weight / static_cast<double>(n);
      for (std::size_t p = 0; p < num_frames; ++p) {
        const Mat& x = frames[p];
        auto& mu = res.means[p][static_cast<std::size_t>(c)];
        auto& cov = res.covs[p][static_cast<std::size_t>(c)];
        if (weight < 1e-10 * static_cast<double>(n)) {
          // Collapsed component: keep its previous mean (or the data mean) and
          // fall back to the data covariance.
          if (mu.size() == 0) mu = x.rowwise().mean();
          cov = Mat(variances[p].asDiagonal());
          res.floor_applied = true;
          continue;
        }
        mu = (x * resp.col(c)) / weight;
        const Mat centered = x.colwise() - mu;
        cov = (centered * resp.col(c).asDiagonal() * centered.transpose()) / weight;
        if (apply_floor(cov, variances[p], opt.cov_floor)) res.floor_applied = true;
      }
    }
    double psum = 0.0;
    for (double v : res.priors) psum += v;
    for (double& v : res.priors) v /= psum;
  };

  auto e_step = [&](Mat& resp) {
    std::vector<std::vector<Factor>> factors(num_frames);
    for (std::size_t p = 0; p < num_frames; ++p) {
      for (int c = 0; c < k; ++c) factors[p].push_back(factor(res.covs[p][static_cast<std::size_t>(c)]));
    }
    double ll = 0.0;
    Vec logp(k);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (int c = 0; c < k; ++c) {
        const double prior = res.priors[static_cast<std::size_t>(c)];
        double lp = prior > 0.0 ? std::log(prior) : -std::numeric_limits<double>::infinity();
        for (std::size_t p = 0; p < num_frames; ++p) {
          lp += log_density(factors[p][static_cast<std::size_t>(c)], Vec(frames[p].col(i)),
                            res.means[p][static_cast<std::size_t>(c)]);
        }
        logp[c] = lp;
      }
      const double lse = log_sum_exp(logp);
      ll += lse;
      resp.row(i) = (logp.array() - lse).exp().transpose();
      resp.row(i) /= resp.row(i).sum();
    }
    return ll;
  };

  m_step(gamma);
  double prev = -std::numeric_limits<double>::infinity();
  for (int it = 0; it < opt.max_iter; ++it) {
    const double ll = e_step(gamma);
    res.log_likelihood.push_back(ll);
    res.iterations = it + 1;
    if (it > 0 && (ll - prev) < opt.tol * static_cast<double>(n)) return res;
    prev = ll;
    m_step(gamma);
  }
  res.log_likelihood.push_back(e_step(gamma));
  return res;
}

}  // namespace vlmp::detail
