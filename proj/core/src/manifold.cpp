#include "vlmp/manifold.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>
#include <cmath>
#include <limits>
#include <numbers>

#include "vlmp/error.hpp"

namespace vlmp {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid_argument";
    case ErrorKind::DimensionMismatch: return "dimension_mismatch";
    case ErrorKind::Singular: return "singular";
    case ErrorKind::Degenerate: return "degenerate";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Io: return "io";
    case ErrorKind::Config: return "config";
  }
  return "unknown";
}

UnitQuaternion::UnitQuaternion(double w, double x, double y, double z) {
  const double n = std::sqrt(w * w + x * x + y * y + z * z);
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw Error(ErrorKind::InvalidArgument, "quaternion must be finite and non-zero");
  }
  // Leave already-unit input untouched so that parse/format round trips are exact.
  const double scale = std::abs(n - 1.0) <= 4.0 * std::numeric_limits<double>::epsilon() ? 1.0 : n;
  w_ = w / scale;
  x_ = x / scale;
  y_ = y / scale;
  z_ = z / scale;
  // w >= 0; on the w == 0 great sphere fall back to the first non-zero
  // vector component.
  bool flip = w_ < 0.0;
  if (w_ == 0.0) {
    flip = x_ < 0.0 || (x_ == 0.0 && (y_ < 0.0 || (y_ == 0.0 && z_ < 0.0)));
  }
  if (flip) {
    w_ = -w_;
    x_ = -x_;
    y_ = -y_;
    z_ = -z_;
  }
  if (w_ == 0.0) w_ = 0.0;  // drop -0
}

UnitQuaternion::UnitQuaternion(const Eigen::Quaterniond& q)
    : UnitQuaternion(q.w(), q.x(), q.y(), q.z()) {}

UnitQuaternion UnitQuaternion::from_axis_angle(const Vec3& axis, double angle) {
  const double n = axis.norm();
  if (!(n > 0.0)) throw Error(ErrorKind::InvalidArgument, "rotation axis must be non-zero");
  return quat_exp(UnitQuaternion{}, axis / n * angle);
}

UnitQuaternion UnitQuaternion::from_matrix(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 u = svd.matrixU();
  const Mat3& v = svd.matrixV();
  if ((u * v.transpose()).determinant() < 0.0) u.col(2) = -u.col(2);
  const Mat3 r = u * v.transpose();
  return UnitQuaternion(Eigen::Quaterniond(r));
}

Mat3 UnitQuaternion::to_matrix() const { return to_eigen().toRotationMatrix(); }

UnitQuaternion UnitQuaternion::inverse() const { return UnitQuaternion(w_, -x_, -y_, -z_); }

Vec3 UnitQuaternion::rotate(const Vec3& v) const { return to_eigen() * v; }

UnitQuaternion operator*(const UnitQuaternion& a, const UnitQuaternion& b) {
  return UnitQuaternion(a.w_ * b.w_ - a.x_ * b.x_ - a.y_ * b.y_ - a.z_ * b.z_,
                        a.w_ * b.x_ + a.x_ * b.w_ + a.y_ * b.z_ - a.z_ * b.y_,
                        a.w_ * b.y_ - a.x_ * b.z_ + a.y_ * b.w_ + a.z_ * b.x_,
                        a.w_ * b.z_ + a.x_ * b.y_ - a.y_ * b.x_ + a.z_ * b.w_);
}

RotationVector quat_log(const UnitQuaternion& base, const UnitQuaternion& q) {
  const UnitQuaternion r = base.inverse() * q;
  const Vec3 v(r.x(), r.y(), r.z());
  const double n = v.norm();
  if (n == 0.0) return Vec3::Zero();
  const double angle = 2.0 * std::atan2(n, r.w());
  return v * (angle / n);
}

UnitQuaternion quat_exp(const UnitQuaternion& base, const RotationVector& v) {
  const double theta = v.norm();
  if (!std::isfinite(theta)) throw Error(ErrorKind::InvalidArgument, "tangent vector must be finite");
  if (theta == 0.0) return base;
  const double s = std::sin(0.5 * theta) / theta;
  return base * UnitQuaternion(std::cos(0.5 * theta), s * v.x(), s * v.y(), s * v.z());
}

double geodesic_angle(const UnitQuaternion& a, const UnitQuaternion& b) {
  const Eigen::Vector4d qa = a.coeffs_wxyz();
  const Eigen::Vector4d qb = b.coeffs_wxyz();
  const double s = qa.dot(qb) < 0.0 ? -1.0 : 1.0;
  const double chord_minus = (qa - s * qb).norm();
  const double chord_plus = (qa + s * qb).norm();
  // Half of the S^3 arc is atan2(|a-b|, |a+b|); the rotation angle is twice the arc.
  return 4.0 * std::atan2(chord_minus, chord_plus);
}

Mat3 transport_basis(const UnitQuaternion& from, const UnitQuaternion& to) {
  return (from.inverse() * to).to_matrix();
}

Mat3 parallel_transport(const UnitQuaternion& from, const UnitQuaternion& to, const Mat3& m) {
  const Mat3 basis = transport_basis(from, to);
  const Mat3 out = basis.transpose() * m * basis;
  return 0.5 * (out + out.transpose());
}

UnitQuaternion quat_mean(const std::vector<UnitQuaternion>& qs, int max_iter) {
  if (qs.empty()) throw Error(ErrorKind::InvalidArgument, "quat_mean of an empty set");
  Eigen::Vector4d acc = Eigen::Vector4d::Zero();
  const Eigen::Vector4d ref = qs.front().coeffs_wxyz();
  for (const auto& q : qs) {
    const Eigen::Vector4d c = q.coeffs_wxyz();
    acc += c.dot(ref) < 0.0 ? Eigen::Vector4d(-c) : c;
  }
  UnitQuaternion mean = acc.norm() > 0.0 ? UnitQuaternion(acc[0], acc[1], acc[2], acc[3]) : qs.front();
  for (int it = 0; it < max_iter; ++it) {
    Vec3 step = Vec3::Zero();
    for (const auto& q : qs) step += quat_log(mean, q);
    step /= static_cast<double>(qs.size());
    mean = quat_exp(mean, step);
    if (step.norm() < 1e-14) break;
  }
  return mean;
}

double pose_distance(const Pose& a, const Pose& b, double w_rot) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "pose_distance: position dimensions differ");
  }
  if (w_rot < 0.0) throw Error(ErrorKind::InvalidArgument, "pose_distance: w_rot must be >= 0");
  const double lin = (a.position - b.position).norm();
  if (w_rot == 0.0) return lin;
  return lin + w_rot * geodesic_angle(a.orientation, b.orientation);
}

Mat PoseTrajectory::positions() const {
  Mat out(dim(), static_cast<Eigen::Index>(poses.size()));
  for (std::size_t i = 0; i < poses.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = poses[i].position;
  return out;
}

TaskFrame TaskFrame::identity(int dim) { return {Mat::Identity(dim, dim), Vec::Zero(dim), true}; }

TaskFrame TaskFrame::from_pose(const Pose& p) {
  const int d = p.dim();
  TaskFrame f = identity(d);
  if (d == 3) f.A = p.orientation.to_matrix();
  f.b = p.position;
  return f;
}

UnitQuaternion TaskFrame::rotation() const {
  if (dim() != 3) return UnitQuaternion{};
  return UnitQuaternion::from_matrix(Mat3(A));
}

Pose TaskFrame::origin_pose() const { return Pose(b, rotation()); }

Pose frame_apply(const TaskFrame& f, const Pose& p) {
  if (f.dim() != p.dim() || f.A.rows() != f.dim() || f.A.cols() != f.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "frame_apply: frame and pose dimensions differ");
  }
  Pose out;
  out.position = f.A * p.position + f.b;
  out.orientation = f.dim() == 3 ? f.rotation() * p.orientation : p.orientation;
  return out;
}

PoseTrajectory frame_apply(const TaskFrame& f, const PoseTrajectory& traj) {
  PoseTrajectory out;
  out.times = traj.times;
  out.poses.reserve(traj.size());
  for (const auto& p : traj.poses) out.poses.push_back(frame_apply(f, p));
  return out;
}

TaskFrame frame_invert(const TaskFrame& f) {
  const int d = f.dim();
  if (f.A.rows() != d || f.A.cols() != d) {
    throw Error(ErrorKind::DimensionMismatch, "frame_invert: A must be square and match b");
  }
  Eigen::FullPivLU<Mat> lu(f.A);
  if (!lu.isInvertible() || lu.rcond() < 1e-12) {
    throw Error(ErrorKind::Singular, "frame_invert: frame matrix is singular");
  }
  TaskFrame inv;
  inv.A = lu.inverse();
  inv.b = -inv.A * f.b;
  inv.rigid = f.rigid;
  return inv;
}

TaskFrame frame_compose(const TaskFrame& g, const TaskFrame& f) {
  if (g.dim() != f.dim()) throw Error(ErrorKind::DimensionMismatch, "frame_compose: dimensions differ");
  return {g.A * f.A, g.A * f.b + g.b, g.rigid && f.rigid};
}

}  // namespace vlmp
