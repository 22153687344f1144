#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "test_support.hpp"
#include "vlmp/error.hpp"
#include "vlmp/kmp.hpp"

using namespace vlmp;
using namespace vlmp::test;
using std::numbers::pi;

namespace {

ReferenceTrajectory sinusoid_reference(std::size_t n, double var) {
  ReferenceTrajectory ref;
  for (double t : linspace(0.0, 1.0, n)) {
    ref.times.push_back(t);
    ref.states.emplace_back(Eigen::Vector2d(std::sin(2 * pi * t), std::cos(3 * pi * t)),
                            var * Mat::Identity(2, 2));
    ref.extrapolated.push_back(false);
  }
  return ref;
}

ReferenceTrajectory random_reference(Rng& rng, std::size_t n, int out) {
  ReferenceTrajectory ref;
  const Vec a = random_vec(rng, out);
  const Vec f = random_vec(rng, out, 2.0);
  for (double t : linspace(0.0, 1.0, n)) {
    Vec m(out);
    for (int k = 0; k < out; ++k) m[k] = a[k] * std::sin(f[k] * t + k);
    ref.times.push_back(t);
    ref.states.emplace_back(m, random_spd(rng, out, 0.01) * 0.01);
    ref.extrapolated.push_back(false);
  }
  return ref;
}

// Independent dense solve of the mean predictor.
Vec mean_oracle(const ReferenceTrajectory& ref, const KernelParams& kp, double lambda, double t) {
  const int n = static_cast<int>(ref.size());
  const int o = ref.output_dim();
  Mat k = Mat::Zero(n * o, n * o);
  Mat s = Mat::Zero(n * o, n * o);
  Vec mu(n * o);
  Mat ks = Mat::Zero(o, n * o);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) k.block(i * o, j * o, o, o) = kp(ref.times[i], ref.times[j]) * Mat::Identity(o, o);
    s.block(i * o, i * o, o, o) = ref.states[i].cov();
    mu.segment(i * o, o) = ref.states[i].mean();
    ks.block(0, i * o, o, o) = kp(t, ref.times[i]) * Mat::Identity(o, o);
  }
  return ks * (k + lambda * s).fullPivLu().solve(mu);
}

}  // namespace

TEST_CASE("kernel is a squared exponential") {
  const KernelParams kp{0.1, 2.0};
  CHECK(kp(0.3, 0.3) == 2.0);
  CHECK(kp(0.0, 0.1) == doctest::Approx(2.0 * std::exp(-0.5)).epsilon(1e-15));
}

TEST_CASE("single reference point is reproduced") {
  ReferenceTrajectory ref;
  ref.times = {0.4};
  ref.states = {GaussianState(Eigen::Vector2d(1.5, -0.5), 1e-8 * Mat::Identity(2, 2))};
  ref.extrapolated = {false};
  const KernelParams kp{0.1, 1.0};
  const KmpModel m = kmp_fit(ref, kp, 1.0, 60.0);
  // 1x1 oracle: k / (k + lambda eps) * mu.
  const double k = kp(0.4, 0.4);
  const Vec expected = ref.states[0].mean() * k / (k + 1e-8);
  CHECK((m.predict_mean(0.4) - expected).norm() < 1e-14);
  CHECK((m.predict_mean(0.4) - ref.states[0].mean()).norm() < 1e-4);
}

TEST_CASE("predictions match a dense solve") {
  Rng rng(1);
  for (int trial = 0; trial < 10; ++trial) {
    const auto ref = random_reference(rng, 30, 3);
    const KernelParams kp{uniform(rng, 0.03, 0.2), uniform(rng, 0.5, 2.0)};
    const KmpModel m = kmp_fit(ref, kp, 1.0, 60.0);
    for (int q = 0; q < 5; ++q) {
      const double t = uniform(rng, 0.0, 1.0);
      CHECK((m.predict_mean(t) - mean_oracle(ref, kp, 1.0, t)).norm() < 1e-9);
    }
  }
}

TEST_CASE("tiny regularization interpolates the reference means") {
  const auto ref = sinusoid_reference(40, 1e-6);
  const KmpModel m = kmp_fit(ref, {0.05, 1.0}, 1e-3, 60.0);
  for (std::size_t i = 0; i < ref.size(); ++i) {
    CHECK((m.predict_mean(ref.times[i]) - ref.states[i].mean()).norm() < 1e-3);
  }
}

TEST_CASE("predicted covariances are symmetric PSD") {
  Rng rng(2);
  const auto ref = random_reference(rng, 50, 3);
  const KmpModel m = kmp_fit(ref, {0.08, 1.0}, 1.0, 60.0);
  for (int i = 0; i < 100; ++i) {
    const GaussianState g = m.predict(uniform(rng, -0.2, 1.2));
    CHECK((g.cov() - g.cov().transpose()).norm() < 1e-12);
    Eigen::SelfAdjointEigenSolver<Mat> es(g.cov());
    CHECK(es.eigenvalues().minCoeff() >= -1e-12);
  }
}

TEST_CASE("prediction is deterministic") {
  const auto ref = sinusoid_reference(30, 0.01);
  const KmpModel m = kmp_fit(ref, {0.05, 1.0}, 1.0, 60.0);
  const auto a = kmp_predict(m, {0.25, 0.25});
  CHECK(a.states[0].mean() == a.states[1].mean());
  CHECK(a.states[0].cov() == a.states[1].cov());
}

TEST_CASE("Gram matrices are symmetric with no negative eigenvalues") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 40;
    const KernelParams kp{uniform(rng, 0.01, 0.3), 1.0};
    Mat k(n, n);
    std::vector<double> ts;
    for (int i = 0; i < n; ++i) ts.push_back(uniform(rng, 0.0, 1.0));
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) k(i, j) = kp(ts[i], ts[j]);
    }
    CHECK((k - k.transpose()).norm() == 0.0);
    Eigen::SelfAdjointEigenSolver<Mat> es(k);
    CHECK(es.eigenvalues().minCoeff() >= -1e-8);
  }
}

TEST_CASE("an epsilon-covariance point attracts the prediction") {
  Rng rng(4);
  for (double eps : {1e-8, 1e-10}) {
    for (int trial = 0; trial < 20; ++trial) {
      auto ref = random_reference(rng, 50, 2);
      const std::size_t idx = 1 + static_cast<std::size_t>(trial) % 48;
      const Vec anchor = ref.states[idx].mean() + random_vec(rng, 2, 0.5);
      ref.states[idx] = GaussianState(anchor, eps * Mat::Identity(2, 2));
      const KmpModel m = kmp_fit(ref, {0.05, 1.0}, 1.0, 60.0);
      CHECK((m.predict_mean(ref.times[idx]) - anchor).norm() <= 10.0 * std::sqrt(eps));
    }
  }
}

TEST_CASE("predictions are continuous in time") {
  const auto ref = sinusoid_reference(50, 0.01);
  const KernelParams kp{0.05, 1.0};
  const KmpModel m = kmp_fit(ref, kp, 1.0, 60.0);
  // The step at delta must scale like delta times a stable slope.
  const double delta = 1e-6;
  for (double t : linspace(0.0, 1.0, 37)) {
    const double step = (m.predict_mean(t + delta) - m.predict_mean(t)).norm();
    const double slope = (m.predict_mean(t + 1e-4) - m.predict_mean(t - 1e-4)).norm() / 2e-4;
    CHECK(step <= (slope + 1e-3) * delta * 1.01);
  }
}

TEST_CASE("larger mean regularization shrinks towards zero") {
  // Zero-mean data with uniform noise: fitted values at the reference times
  // scale every kernel eigencomponent by s / (s + lambda sigma^2).
  ReferenceTrajectory ref;
  Rng rng(5);
  for (double t : linspace(0.0, 1.0, 40)) {
    ref.times.push_back(t);
    ref.states.emplace_back(random_vec(rng, 1), 0.1 * Mat::Identity(1, 1));
    ref.extrapolated.push_back(false);
  }
  double prev = std::numeric_limits<double>::infinity();
  for (double lambda : {0.25, 0.5, 1.0, 2.0, 4.0, 8.0}) {
    const KmpModel m = kmp_fit(ref, {0.05, 1.0}, lambda, 60.0);
    double norm = 0.0;
    for (double t : ref.times) norm += m.predict_mean(t).squaredNorm();
    CHECK(norm <= prev);
    prev = norm;
  }
}

TEST_CASE("fit error cases") {
  ReferenceTrajectory empty;
  CHECK_THROWS_AS(kmp_fit(empty, {}, 1.0, 60.0), Error);
  const auto ref = sinusoid_reference(10, 0.01);
  CHECK_THROWS_AS(kmp_fit(ref, {}, 0.0, 60.0), Error);
  CHECK_THROWS_AS(kmp_fit(ref, {}, 1.0, -1.0), Error);
  CHECK_THROWS_AS(kmp_fit(ref, {-0.1, 1.0}, 1.0, 60.0), Error);
}

TEST_CASE("kernel tuning") {
  const auto ref = sinusoid_reference(60, 1e-4);
  SUBCASE("a one-point grid returns that point") {
    const auto r = kmp_tune(ref, KernelGrid{{0.07}, {1.5}}, 1.0, 60.0);
    CHECK(r.best.lengthscale == 0.07);
    CHECK(r.best.variance == 1.5);
  }
  SUBCASE("the selection minimizes an independently computed held-out RMSE") {
    const KernelGrid grid{{0.3, 0.02, 0.05, 0.1, 0.2, 0.01}, {1.0}};
    const auto r = kmp_tune(ref, grid, 1.0, 60.0);
    ReferenceTrajectory train;
    std::vector<std::size_t> held;
    for (std::size_t i = 0; i < ref.size(); ++i) {
      if (i > 0 && i + 1 < ref.size() && i % 4 == 2) {
        held.push_back(i);
      } else {
        train.times.push_back(ref.times[i]);
        train.states.push_back(ref.states[i]);
        train.extrapolated.push_back(false);
      }
    }
    double best = std::numeric_limits<double>::infinity();
    double best_ls = 0.0;
    for (double ls : grid.lengthscales) {
      double sq = 0.0;
      for (std::size_t i : held) sq += (mean_oracle(train, {ls, 1.0}, 1.0, ref.times[i]) - ref.states[i].mean()).squaredNorm();
      const double rmse = std::sqrt(sq / static_cast<double>(held.size()));
      if (rmse < best) {
        best = rmse;
        best_ls = ls;
      }
    }
    CHECK(r.best.lengthscale == best_ls);
    CHECK(r.best_rmse == doctest::Approx(best).epsilon(1e-6));
    for (const auto& [kp, rmse] : r.scores) CHECK(r.best_rmse <= rmse);
    CHECK(r.scores.size() == grid.lengthscales.size());
  }
  SUBCASE("tuning is deterministic") {
    const KernelGrid grid{{0.02, 0.05, 0.1}, {0.5, 1.0}};
    const auto a = kmp_tune(ref, grid, 1.0, 60.0);
    const auto b = kmp_tune(ref, grid, 1.0, 60.0);
    CHECK(a.best.lengthscale == b.best.lengthscale);
    CHECK(a.best.variance == b.best.variance);
    CHECK(a.best_rmse == b.best_rmse);
  }
  SUBCASE("empty grid is rejected") {
    CHECK_THROWS_AS(kmp_tune(ref, KernelGrid{{}, {1.0}}, 1.0, 60.0), Error);
  }
}
