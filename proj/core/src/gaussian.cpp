#include "vlmp/gaussian.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <random>

#include "vlmp/error.hpp"

namespace vlmp {

GaussianState::GaussianState(Vec mean, Mat cov) : mean_(std::move(mean)), cov_(std::move(cov)) {
  if (cov_.rows() != mean_.size() || cov_.cols() != mean_.size()) {
    throw Error(ErrorKind::DimensionMismatch, "GaussianState: covariance side must equal mean dimension");
  }
  if (!mean_.allFinite() || !cov_.allFinite()) {
    throw Error(ErrorKind::InvalidArgument, "GaussianState: non-finite mean or covariance");
  }
  cov_ = 0.5 * (cov_ + cov_.transpose()).eval();
  if (mean_.size() == 0) return;
  Eigen::SelfAdjointEigenSolver<Mat> es(cov_);
  if (es.eigenvalues().minCoeff() < 0.0) {
    const Vec clamped = es.eigenvalues().cwiseMax(0.0);
    cov_ = es.eigenvectors() * clamped.asDiagonal() * es.eigenvectors().transpose();
    cov_ = 0.5 * (cov_ + cov_.transpose()).eval();
  }
}

GaussianState GaussianState::marginal(int start, int n) const {
  if (start < 0 || n < 0 || start + n > dim()) {
    throw Error(ErrorKind::DimensionMismatch, "GaussianState::marginal: block out of range");
  }
  return {mean_.segment(start, n), cov_.block(start, start, n, n)};
}

Mat regularized_inverse(const Mat& cov) {
  const auto n = cov.rows();
  const Mat ident = Mat::Identity(n, n);
  Eigen::LLT<Mat> llt(cov);
  if (llt.info() == Eigen::Success) return llt.solve(ident);
  const double delta = kCovarianceJitter * cov.trace() / static_cast<double>(n);
  if (delta > 0.0) {
    llt.compute(cov + delta * ident);
    if (llt.info() == Eigen::Success) return llt.solve(ident);
  }
  throw Error(ErrorKind::Singular, "covariance is singular after regularization");
}

GaussianState gaussian_product(std::span<const GaussianState> gs) {
  if (gs.empty()) throw Error(ErrorKind::InvalidArgument, "gaussian_product: no inputs");
  const int d = gs.front().dim();
  if (gs.size() == 1) return gs.front();
  Mat precision = Mat::Zero(d, d);
  Vec info = Vec::Zero(d);
  std::size_t used = 0;
  for (const auto& g : gs) {
    if (g.dim() != d) throw Error(ErrorKind::DimensionMismatch, "gaussian_product: dimensions differ");
    Mat lambda;
    try {
      lambda = regularized_inverse(g.cov());
    } catch (const Error&) {
      continue;  // zero-trace (point mass) input; skipped
    }
    precision += lambda;
    info += lambda * g.mean();
    ++used;
  }
  if (used == 0) throw Error(ErrorKind::Singular, "gaussian_product: all covariances are singular");
  Eigen::LLT<Mat> llt(precision);
  if (llt.info() != Eigen::Success) throw Error(ErrorKind::Singular, "gaussian_product: fused precision not PD");
  Mat cov = llt.solve(Mat::Identity(d, d));
  Vec mean = cov * info;
  return {std::move(mean), std::move(cov)};
}

GaussianState gaussian_product(const GaussianState& a, const GaussianState& b) {
  const GaussianState pair[] = {a, b};
  return gaussian_product(std::span<const GaussianState>(pair));
}

GaussianState gaussian_affine(const Mat& a, const Vec& b, const GaussianState& g) {
  if (a.cols() != g.dim() || a.rows() != b.size()) {
    throw Error(ErrorKind::DimensionMismatch, "gaussian_affine: dimensions differ");
  }
  return {a * g.mean() + b, a * g.cov() * a.transpose()};
}

GaussianState gaussian_affine(const TaskFrame& f, const GaussianState& g) {
  return gaussian_affine(f.A, f.b, g);
}

std::vector<Vec> gaussian_sample(const GaussianState& g, std::uint64_t seed, std::size_t n) {
  const int d = g.dim();
  Eigen::SelfAdjointEigenSolver<Mat> es(g.cov());
  const Mat root = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Vec> out;
  out.reserve(n);
  Vec z(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (int k = 0; k < d; ++k) z[k] = normal(rng);
    out.emplace_back(g.mean() + root * z);
  }
  return out;
}

}  // namespace vlmp
