#include "vlmp/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "vlmp/error.hpp"

namespace vlmp {

Mat resample_arc_length(const Mat& positions, std::size_t n) {
  const Eigen::Index m = positions.cols();
  if (m < 2 || n < 2) throw Error(ErrorKind::InvalidArgument, "resample_arc_length: need at least two points");
  std::vector<double> s(static_cast<std::size_t>(m), 0.0);
  for (Eigen::Index i = 1; i < m; ++i) {
    s[static_cast<std::size_t>(i)] = s[static_cast<std::size_t>(i - 1)] + (positions.col(i) - positions.col(i - 1)).norm();
  }
  const double total = s.back();
  Mat out(positions.rows(), static_cast<Eigen::Index>(n));
  if (total == 0.0) {
    out.colwise() = positions.col(0);
    return out;
  }
  std::size_t seg = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const double target = total * static_cast<double>(j) / static_cast<double>(n - 1);
    while (seg + 2 < static_cast<std::size_t>(m) && s[seg + 1] < target) ++seg;
    const double len = s[seg + 1] - s[seg];
    const double a = len > 0.0 ? std::clamp((target - s[seg]) / len, 0.0, 1.0) : 0.0;
    out.col(static_cast<Eigen::Index>(j)) = (1.0 - a) * positions.col(static_cast<Eigen::Index>(seg)) +
                                            a * positions.col(static_cast<Eigen::Index>(seg + 1));
  }
  out.col(0) = positions.col(0);
  out.col(static_cast<Eigen::Index>(n - 1)) = positions.col(m - 1);
  return out;
}

double topological_similarity(const Mat& gen_in, const Mat& ref_in) {
  if (gen_in.cols() < 2 || ref_in.cols() < 2) {
    throw Error(ErrorKind::InvalidArgument, "topological_similarity: need at least two points");
  }
  if (gen_in.rows() != ref_in.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "topological_similarity: dimensions differ");
  }
  Mat gen = gen_in;
  Mat ref = ref_in;
  if (gen.cols() != ref.cols()) {
    const auto n = static_cast<std::size_t>(std::max(gen.cols(), ref.cols()));
    gen = resample_arc_length(gen_in, n);
    ref = resample_arc_length(ref_in, n);
  }
  const Eigen::Index n = gen.cols();
  double sum = 0.0;
  for (Eigen::Index t = 0; t + 1 < n; ++t) {
    const Vec dg = gen.col(t + 1) - gen.col(t);
    const Vec dr = ref.col(t + 1) - ref.col(t);
    const double gg = dg.squaredNorm();
    const double rr = dr.squaredNorm();
    if (gg == 0.0 || rr == 0.0) {
      sum += (gg == 0.0 && rr == 0.0) ? 1.0 : 0.0;
      continue;
    }
    sum += std::clamp(dg.dot(dr) / std::sqrt(gg * rr), -1.0, 1.0);
  }
  return 100.0 * sum / static_cast<double>(n - 1);
}

double topological_similarity(const PoseTrajectory& gen, const PoseTrajectory& ref) {
  return topological_similarity(gen.positions(), ref.positions());
}

double smoothness(const PoseTrajectory& traj) {
  const std::size_t n = traj.size();
  if (n < 3) throw Error(ErrorKind::InvalidArgument, "smoothness: need at least three points");
  if (traj.times.size() != n) throw Error(ErrorKind::InvalidArgument, "smoothness: missing timestamps");
  const double dt = (traj.times.back() - traj.times.front()) / static_cast<double>(n - 1);
  if (!(dt > 0.0)) throw Error(ErrorKind::InvalidArgument, "smoothness: timestamps must increase");
  for (std::size_t i = 1; i < n; ++i) {
    if (std::abs((traj.times[i] - traj.times[i - 1]) - dt) > 1e-6 * dt) {
      throw Error(ErrorKind::InvalidArgument, "smoothness: sampling must be uniform in time");
    }
  }
  double sum = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    sum += (traj.poses[i + 1].position - 2.0 * traj.poses[i].position + traj.poses[i - 1].position).norm();
  }
  return sum / (static_cast<double>(n - 2) * dt * dt);
}

double endpoint_error(const PoseTrajectory& gen, const TaskParameters& anchors) {
  if (anchors.size() != 2) throw Error(ErrorKind::InvalidArgument, "endpoint_error: expects start and end frames");
  if (gen.empty()) throw Error(ErrorKind::InvalidArgument, "endpoint_error: empty trajectory");
  const double start = (gen.poses.front().position - anchors.frames.front().b).norm();
  const double end = (gen.poses.back().position - anchors.frames.back().b).norm();
  return std::max(start, end);
}

MetricReport evaluate(const PoseTrajectory& gen, const PoseTrajectory& ref, const TaskParameters& anchors) {
  MetricReport r;
  r.c_s = topological_similarity(gen, ref);
  r.kappa_s = smoothness(gen);
  r.endpoint_error = endpoint_error(gen, anchors);
  r.n_points = gen.size();
  return r;
}

}  // namespace vlmp
