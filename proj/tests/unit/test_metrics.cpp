#include <doctest.h>

#include "test_support.hpp"
#include "vlmp/error.hpp"
#include "vlmp/metrics.hpp"

using namespace vlmp;
using namespace vlmp::test;
using std::numbers::pi;

namespace {

PoseTrajectory from_points(const std::vector<Vec>& pts, double dt = 1.0) {
  PoseTrajectory t;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    t.times.push_back(dt * static_cast<double>(i));
    t.poses.emplace_back(pts[i]);
  }
  return t;
}

PoseTrajectory spiral(std::size_t n) {
  std::vector<Vec> pts;
  for (std::size_t i = 0; i < n; ++i) {
    const double s = static_cast<double>(i) / static_cast<double>(n - 1);
    pts.push_back(Eigen::Vector2d((1 + s) * std::cos(4 * s), (1 + s) * std::sin(4 * s)));
  }
  return from_points(pts, 1.0 / static_cast<double>(n - 1));
}

PoseTrajectory reversed(const PoseTrajectory& t) {
  std::vector<Vec> pts;
  for (auto it = t.poses.rbegin(); it != t.poses.rend(); ++it) pts.push_back(it->position);
  return from_points(pts, t.times[1] - t.times[0]);
}


// Straight re-implementation of the smoothness sum.
double smoothness_oracle(const std::vector<Vec>& pts, double dt) {
  double sum = 0.0;
  for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
    const Vec acc = (pts[i + 1] - pts[i]) - (pts[i] - pts[i - 1]);
    sum += std::sqrt(acc.squaredNorm());
  }
  return sum / static_cast<double>(pts.size() - 2) / (dt * dt);
}

}  // namespace

// Odd curve: point i and point n-1-i are exact negatives, so reversing the
// traversal negates every segment exactly.
PoseTrajectory odd_curve(std::size_t n) {
  std::vector<Vec> pts(n);
  for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
    const double s = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(n - 1);
    pts[i] = Eigen::Vector2d(s, std::sin(pi * s) + 0.3 * s * s * s);
    pts[n - 1 - i] = -pts[i];
  }
  if (n % 2 == 1) pts[n / 2] = Vec::Zero(2);
  return from_points(pts);
}

TEST_CASE("similarity of a trajectory with itself and its reverse") {
  const auto s = spiral(150);
  CHECK(topological_similarity(s, s) == 100.0);
  for (std::size_t n : {2u, 3u, 150u, 151u}) {
    const auto c = odd_curve(n);
    CHECK(topological_similarity(reversed(c), c) == -100.0);
  }
  // A curve without that symmetry pairs each segment with a different one.
  CHECK(topological_similarity(reversed(s), s) > -100.0);
}

TEST_CASE("similarity with an in-plane quarter turn is zero") {
  const auto s = spiral(120);
  std::vector<Vec> pts;
  for (const auto& p : s.poses) pts.push_back(rot2(pi / 2) * p.position);
  CHECK(std::abs(topological_similarity(from_points(pts), s)) < 1e-12);
}

TEST_CASE("similarity is bounded and invariant to common translation and scaling") {
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Vec> a;
    std::vector<Vec> b;
    for (int i = 0; i < 40; ++i) {
      a.push_back(random_vec(rng, 2));
      b.push_back(random_vec(rng, 2));
    }
    const double base = topological_similarity(from_points(a), from_points(b));
    CHECK(base >= -100.0);
    CHECK(base <= 100.0);
    const Vec shift = random_vec(rng, 2, 10.0);
    const double scale = uniform(rng, 0.1, 10.0);
    std::vector<Vec> a2;
    std::vector<Vec> b2;
    for (int i = 0; i < 40; ++i) {
      a2.push_back(scale * a[i] + shift);
      b2.push_back(scale * b[i] + shift);
    }
    CHECK(topological_similarity(from_points(a2), from_points(b2)) == doctest::Approx(base).epsilon(1e-9));
  }
}

TEST_CASE("different point counts are compared in arc length") {
  // Same path, different counts and speed profiles.
  std::vector<Vec> uniform_pts;
  std::vector<Vec> eased_pts;
  for (int i = 0; i < 300; ++i) {
    const double s = i / 299.0;
    uniform_pts.push_back(Eigen::Vector2d(std::cos(3 * s), std::sin(3 * s)));
  }
  for (int i = 0; i < 180; ++i) {
    const double s = i / 179.0;
    const double e = s * s * (3 - 2 * s);
    eased_pts.push_back(Eigen::Vector2d(std::cos(3 * e), std::sin(3 * e)));
  }
  CHECK(topological_similarity(from_points(eased_pts), from_points(uniform_pts)) > 99.9);
}

TEST_CASE("similarity is order sensitive") {
  const auto s = spiral(60);
  PoseTrajectory shuffled = s;
  std::swap(shuffled.poses[10], shuffled.poses[40]);
  CHECK(topological_similarity(shuffled, s) < 100.0);
}

TEST_CASE("zero-length segments") {
  const std::vector<Vec> still(5, Vec::Zero(2));
  CHECK(topological_similarity(from_points(still), from_points(still)) == 100.0);
  CHECK_THROWS_AS(topological_similarity(from_points({Vec::Zero(2)}), from_points(still)), Error);
}

TEST_CASE("smoothness") {
  SUBCASE("a uniform straight line has none") {
    std::vector<Vec> pts;
    for (int i = 0; i < 50; ++i) pts.push_back(Eigen::Vector2d(3.0 * i, -2.0 * i));
    CHECK(smoothness(from_points(pts)) == 0.0);
  }
  SUBCASE("t squared on the unit grid gives two") {
    std::vector<Vec> pts;
    for (int i = 0; i < 50; ++i) pts.push_back(Vec::Constant(1, static_cast<double>(i * i)));
    CHECK(smoothness(from_points(pts)) == 2.0);
  }
  SUBCASE("agrees with a finite-difference oracle") {
    Rng rng(2);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      const int n = 3 + trial;
      const double dt = uniform(rng, 0.01, 0.5);
      std::vector<Vec> pts;
      for (int i = 0; i < n; ++i) pts.push_back(random_vec(rng, 2 + trial % 2));
      const double expected = smoothness_oracle(pts, dt);
      worst = std::max(worst, std::abs(smoothness(from_points(pts, dt)) - expected) / expected);
    }
    CHECK(worst < 1e-12);
  }
  SUBCASE("zero exactly for affine motion and positive otherwise") {
    std::vector<Vec> pts;
    for (int i = 0; i < 20; ++i) pts.push_back(Eigen::Vector2d(0.5 * i + 1.0, 2.0));
    CHECK(smoothness(from_points(pts)) == 0.0);
    pts[7].y() += 1e-3;
    CHECK(smoothness(from_points(pts)) > 0.0);
  }
  SUBCASE("error cases") {
    CHECK_THROWS_AS(smoothness(from_points({Vec::Zero(2), Vec::Ones(2)})), Error);
    PoseTrajectory uneven = from_points({Vec::Zero(2), Vec::Ones(2), Vec::Zero(2), Vec::Ones(2)});
    uneven.times[2] = 2.5;
    CHECK_THROWS_AS(smoothness(uneven), Error);
  }
}

TEST_CASE("endpoint error") {
  TaskParameters anchors;
  anchors.frames = {TaskFrame::identity(2), TaskFrame::identity(2)};
  anchors.frames[1].b = Eigen::Vector2d(5.0, 1.0);
  SUBCASE("exact endpoints") {
    CHECK(endpoint_error(line_demo(Eigen::Vector2d(0, 0), Eigen::Vector2d(5, 1), 10), anchors) == 0.0);
  }
  SUBCASE("a 3-4-5 start offset") {
    CHECK(endpoint_error(line_demo(Eigen::Vector2d(0.3, 0.4), Eigen::Vector2d(5, 1), 10), anchors) ==
          doctest::Approx(0.5).epsilon(1e-15));
  }
  SUBCASE("matches the larger of the two deviations") {
    Rng rng(3);
    for (int i = 0; i < 100; ++i) {
      const Vec s = random_vec(rng, 2);
      const Vec e = random_vec(rng, 2);
      const auto traj = line_demo(s, e, 5);
      const Vec& last = traj.poses.back().position;
      const double expected = std::max((s - anchors.frames[0].b).norm(), (last - anchors.frames[1].b).norm());
      CHECK(endpoint_error(traj, anchors) == expected);
    }
  }
}

TEST_CASE("evaluate bundles the three metrics") {
  const auto s = spiral(100);
  TaskParameters anchors;
  anchors.frames = {TaskFrame::identity(2), TaskFrame::identity(2)};
  anchors.frames[0].b = s.poses.front().position;
  anchors.frames[1].b = s.poses.back().position;
  const MetricReport r = evaluate(s, s, anchors);
  CHECK(r.c_s == 100.0);
  CHECK(r.kappa_s == smoothness(s));
  CHECK(r.endpoint_error == 0.0);
  CHECK(r.n_points == 100);
}
