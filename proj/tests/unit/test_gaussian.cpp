#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "test_support.hpp"
#include "vlmp/error.hpp"
#include "vlmp/gaussian.hpp"

using namespace vlmp;
using namespace vlmp::test;

namespace {

// Closed-form product via explicit LU inverses, independent of the library's
// Cholesky path.
GaussianState product_oracle(const std::vector<GaussianState>& gs) {
  const int d = gs.front().dim();
  Mat precision = Mat::Zero(d, d);
  Vec info = Vec::Zero(d);
  for (const auto& g : gs) {
    const Mat p = g.cov().fullPivLu().inverse();
    precision += p;
    info += p * g.mean();
  }
  const Mat cov = precision.fullPivLu().inverse();
  return {cov * info, cov};
}

double gap(const GaussianState& a, const GaussianState& b) {
  return std::max((a.mean() - b.mean()).cwiseAbs().maxCoeff(), (a.cov() - b.cov()).cwiseAbs().maxCoeff());
}

GaussianState random_gaussian(Rng& rng, int d) { return {random_vec(rng, d), random_spd(rng, d)}; }

}  // namespace

TEST_CASE("construction symmetrizes and clamps to PSD") {
  Mat c(2, 2);
  c << 1.0, 2.0, 2.0, 1.0;  // eigenvalues 3 and -1
  const GaussianState g(Vec::Zero(2), c);
  Eigen::SelfAdjointEigenSolver<Mat> es(g.cov());
  CHECK(es.eigenvalues().minCoeff() >= -1e-12);
  CHECK((g.cov() - g.cov().transpose()).norm() == 0.0);
  CHECK_THROWS_AS(GaussianState(Vec::Zero(2), Mat::Identity(3, 3)), Error);
}

TEST_CASE("product of a single Gaussian is itself") {
  Rng rng(1);
  const auto g = random_gaussian(rng, 3);
  const GaussianState one[] = {g};
  CHECK(gap(gaussian_product(one), g) == 0.0);
}

TEST_CASE("product of two unit-variance Gaussians meets halfway") {
  const GaussianState a(Vec::Constant(1, 0.0), Mat::Constant(1, 1, 1.0));
  const GaussianState b(Vec::Constant(1, 2.0), Mat::Constant(1, 1, 1.0));
  const GaussianState p = gaussian_product(a, b);
  CHECK(p.mean()[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(p.cov()(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("product matches the precision-sum closed form") {
  Rng rng(2);
  double worst = 0.0;
  double worst_precision = 0.0;
  for (int i = 0; i < 500; ++i) {
    const int d = 2 + i % 5;
    const int n = 2 + i % 3;
    std::vector<GaussianState> gs;
    Mat precision_sum = Mat::Zero(d, d);
    for (int k = 0; k < n; ++k) {
      gs.push_back(random_gaussian(rng, d));
      precision_sum += gs.back().cov().inverse();
    }
    const GaussianState p = gaussian_product(gs);
    worst = std::max(worst, gap(p, product_oracle(gs)));
    worst_precision = std::max(worst_precision, (p.cov().inverse() - precision_sum).cwiseAbs().maxCoeff());
  }
  CHECK(worst < 1e-10);
  CHECK(worst_precision < 1e-10);
}

TEST_CASE("product is commutative and associative") {
  Rng rng(3);
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const int d = 2 + i % 5;
    const auto a = random_gaussian(rng, d);
    const auto b = random_gaussian(rng, d);
    const auto c = random_gaussian(rng, d);
    const GaussianState all[] = {a, b, c};
    const GaussianState flat = gaussian_product(all);
    worst = std::max(worst, gap(flat, gaussian_product(gaussian_product(a, b), c)));
    worst = std::max(worst, gap(flat, gaussian_product(a, gaussian_product(b, c))));
    worst = std::max(worst, gap(flat, gaussian_product(gaussian_product(c, a), b)));
    worst = std::max(worst, gap(gaussian_product(a, b), gaussian_product(b, a)));
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("near-deterministic inputs dominate the product") {
  const GaussianState sharp(Vec::Constant(2, 3.0), 1e-12 * Mat::Identity(2, 2));
  const GaussianState broad(Vec::Zero(2), Mat::Identity(2, 2));
  const GaussianState p = gaussian_product(sharp, broad);
  CHECK((p.mean() - sharp.mean()).norm() < 1e-9);
}

TEST_CASE("product error cases") {
  const GaussianState point(Vec::Zero(2), Mat::Zero(2, 2));
  CHECK_THROWS_AS(gaussian_product(point, point), Error);
  CHECK_THROWS_AS(gaussian_product(std::span<const GaussianState>()), Error);
  const GaussianState a(Vec::Zero(2), Mat::Identity(2, 2));
  const GaussianState b(Vec::Zero(3), Mat::Identity(3, 3));
  CHECK_THROWS_AS(gaussian_product(a, b), Error);
}

TEST_CASE("affine transform") {
  Rng rng(4);
  const auto g = random_gaussian(rng, 2);
  SUBCASE("identity frame leaves it unchanged") {
    CHECK(gap(gaussian_affine(TaskFrame::identity(2), g), g) == 0.0);
  }
  SUBCASE("scaling by two doubles the mean and quadruples the covariance") {
    const GaussianState s = gaussian_affine(2.0 * Mat::Identity(2, 2), Vec::Zero(2), g);
    CHECK((s.mean() - 2.0 * g.mean()).norm() < 1e-15);
    CHECK((s.cov() - 4.0 * g.cov()).norm() < 1e-14);
  }
  SUBCASE("rigid frames preserve covariance eigenvalues") {
    for (int i = 0; i < 100; ++i) {
      const TaskFrame f = random_rigid_frame(rng, 3);
      const GaussianState h = random_gaussian(rng, 3);
      Eigen::SelfAdjointEigenSolver<Mat> e0(h.cov());
      Eigen::SelfAdjointEigenSolver<Mat> e1(gaussian_affine(f, h).cov());
      CHECK((e0.eigenvalues() - e1.eigenvalues()).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
  SUBCASE("transformed samples match the transformed moments") {
    const std::size_t n = 100000;
    Mat a(2, 2);
    a << 1.5, -0.3, 0.4, 0.8;
    const Vec b = Eigen::Vector2d(1.0, -2.0);
    const GaussianState expected = gaussian_affine(a, b, g);
    const auto xs = gaussian_sample(g, 99, n);
    Vec mean = Vec::Zero(2);
    for (const auto& x : xs) mean += a * x + b;
    mean /= static_cast<double>(n);
    Mat cov = Mat::Zero(2, 2);
    for (const auto& x : xs) {
      const Vec y = a * x + b - mean;
      cov += y * y.transpose();
    }
    cov /= static_cast<double>(n - 1);
    for (int k = 0; k < 2; ++k) {
      const double sd = std::sqrt(expected.cov()(k, k));
      CHECK(std::abs(mean[k] - expected.mean()[k]) < 3.0 * sd / std::sqrt(static_cast<double>(n)));
      // Variance of a sample variance is 2 s^4 / (n - 1).
      const double var_sd = std::sqrt(2.0 / static_cast<double>(n - 1)) * sd * sd;
      CHECK(std::abs(cov(k, k) - expected.cov()(k, k)) < 3.0 * var_sd);
    }
  }
}

TEST_CASE("sampling") {
  SUBCASE("zero covariance gives copies of the mean") {
    const GaussianState g(Eigen::Vector3d(1, 2, 3), Mat::Zero(3, 3));
    for (const auto& x : gaussian_sample(g, 5, 10)) CHECK(x == g.mean());
  }
  SUBCASE("same seed, same draws") {
    Rng rng(6);
    const auto g = random_gaussian(rng, 4);
    CHECK(gaussian_sample(g, 42, 50) == gaussian_sample(g, 42, 50));
    CHECK(gaussian_sample(g, 42, 50) != gaussian_sample(g, 43, 50));
  }
  SUBCASE("empirical mean of a standard normal") {
    const GaussianState g(Vec::Zero(2), Mat::Identity(2, 2));
    Vec mean = Vec::Zero(2);
    for (const auto& x : gaussian_sample(g, 7, 100000)) mean += x;
    mean /= 100000.0;
    CHECK(mean.cwiseAbs().maxCoeff() < 0.02);
  }
}
