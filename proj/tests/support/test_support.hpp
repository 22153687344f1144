#pragma once

// Random generators and small independent oracles shared by the tests.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "vlmp/lfekmp.hpp"
#include "vlmp/manifold.hpp"

namespace vlmp::test {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Vec random_vec(Rng& rng, int n, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = normal(rng);
  return v;
}

inline Vec3 random_unit3(Rng& rng) {
  Vec3 v;
  do {
    v = random_vec(rng, 3);
  } while (v.norm() < 1e-3);
  return v.normalized();
}

/// Uniform random rotation (normalized 4D Gaussian).
inline UnitQuaternion random_quat(Rng& rng) {
  Vec v;
  do {
    v = random_vec(rng, 4);
  } while (v.norm() < 1e-3);
  return {v[0], v[1], v[2], v[3]};
}

/// Well-conditioned symmetric positive definite matrix.
inline Mat random_spd(Rng& rng, int n, double ridge = 0.5) {
  const Mat a = random_vec(rng, n * n).reshaped(n, n);
  return a * a.transpose() + ridge * Mat::Identity(n, n);
}

inline Mat rot2(double angle) {
  Mat r(2, 2);
  r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  return r;
}

inline TaskFrame random_rigid_frame(Rng& rng, int dim, double spread = 5.0) {
  TaskFrame f;
  f.b = random_vec(rng, dim, spread);
  if (dim == 2) {
    f.A = rot2(uniform(rng, -std::numbers::pi, std::numbers::pi));
  } else {
    f.A = random_quat(rng).to_matrix();
  }
  return f;
}

/// Brute-force quaternion comparison that ignores the sign.
inline double quat_gap(const UnitQuaternion& a, const UnitQuaternion& b) {
  const Eigen::Vector4d x = a.coeffs_wxyz();
  const Eigen::Vector4d y = b.coeffs_wxyz();
  return std::min((x - y).norm(), (x + y).norm());
}

/// Straight 2D line from `from` to `to` with `n` samples on [0, 1].
inline PoseTrajectory line_demo(const Vec& from, const Vec& to, std::size_t n) {
  PoseTrajectory traj;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(n - 1);
    traj.times.push_back(t);
    traj.poses.emplace_back(Vec(from + t * (to - from)));
  }
  return traj;
}

/// Positions of a trajectory as points resampled evenly in arc length
/// (independent of the library's resampler).
inline std::vector<Vec> arc_resample(const PoseTrajectory& traj, std::size_t n) {
  std::vector<double> s{0.0};
  for (std::size_t i = 1; i < traj.size(); ++i) {
    s.push_back(s.back() + (traj.poses[i].position - traj.poses[i - 1].position).norm());
  }
  std::vector<Vec> out;
  std::size_t seg = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double target = s.back() * static_cast<double>(k) / static_cast<double>(n - 1);
    while (seg + 2 < s.size() && s[seg + 1] < target) ++seg;
    const double len = s[seg + 1] - s[seg];
    const double u = len > 0.0 ? std::clamp((target - s[seg]) / len, 0.0, 1.0) : 0.0;
    out.push_back((1.0 - u) * traj.poses[seg].position + u * traj.poses[seg + 1].position);
  }
  return out;
}

inline double arc_length(const PoseTrajectory& traj) {
  double len = 0.0;
  for (std::size_t i = 1; i < traj.size(); ++i) {
    len += (traj.poses[i].position - traj.poses[i - 1].position).norm();
  }
  return len;
}

/// RMSE between arc-length resampled copies, relative to the reference length.
inline double relative_arc_rmse(const PoseTrajectory& gen, const PoseTrajectory& ref, std::size_t n = 200) {
  const auto a = arc_resample(gen, n);
  const auto b = arc_resample(ref, n);
  double sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) sq += (a[i] - b[i]).squaredNorm();
  return std::sqrt(sq / static_cast<double>(n)) / arc_length(ref);
}

}  // namespace vlmp::test
