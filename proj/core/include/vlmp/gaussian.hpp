#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "vlmp/manifold.hpp"

namespace vlmp {

/// Mean and covariance of a multivariate normal. The constructor symmetrizes
/// the covariance and clamps negative eigenvalues to zero.
class GaussianState {
 public:
  GaussianState() = default;
  GaussianState(Vec mean, Mat cov);

  const Vec& mean() const { return mean_; }
  const Mat& cov() const { return cov_; }
  int dim() const { return static_cast<int>(mean_.size()); }

  /// Contiguous sub-block [start, start + n) as a marginal Gaussian.
  GaussianState marginal(int start, int n) const;

 private:
  Vec mean_;
  Mat cov_;
};

/// Relative regularization added to near-singular covariances before inversion.
inline constexpr double kCovarianceJitter = 1e-10;

/// Precision of `cov`, adding kCovarianceJitter * trace / dim * I when a
/// plain Cholesky factorization fails. Throws Singular if that still fails.
Mat regularized_inverse(const Mat& cov);

/// Precision-weighted fusion (mode of the normalized product).
GaussianState gaussian_product(std::span<const GaussianState> gs);
GaussianState gaussian_product(const GaussianState& a, const GaussianState& b);

/// mean -> A mean + b, cov -> A cov A^T.
GaussianState gaussian_affine(const TaskFrame& f, const GaussianState& g);
GaussianState gaussian_affine(const Mat& a, const Vec& b, const GaussianState& g);

/// n draws from g using a 64-bit Mersenne twister seeded with `seed`.
std::vector<Vec> gaussian_sample(const GaussianState& g, std::uint64_t seed, std::size_t n);

}  // namespace vlmp
