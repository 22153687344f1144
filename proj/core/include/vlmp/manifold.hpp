#pragma once

// Unit-quaternion geometry and affine task frames.
//
// Tangent vectors are full rotation vectors (angle * axis) expressed in the
// body frame of the base point:  Log(base, q) = log(base^-1 * q), and
// Exp(base, v) = base * exp(v).  Quaternions are stored with w >= 0 so that
// Log is single valued.

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <vector>

namespace vlmp {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

class UnitQuaternion {
 public:
  UnitQuaternion() = default;  // identity
  /// Normalizes and canonicalizes; throws on a zero or non-finite input.
  UnitQuaternion(double w, double x, double y, double z);
  explicit UnitQuaternion(const Eigen::Quaterniond& q);

  static UnitQuaternion identity() { return {}; }
  static UnitQuaternion from_axis_angle(const Vec3& axis, double angle);
  /// Nearest rotation (polar factor) of an arbitrary invertible 3x3 map.
  static UnitQuaternion from_matrix(const Mat3& m);

  double w() const { return w_; }
  double x() const { return x_; }
  double y() const { return y_; }
  double z() const { return z_; }
  Eigen::Vector4d coeffs_wxyz() const { return {w_, x_, y_, z_}; }

  Eigen::Quaterniond to_eigen() const { return {w_, x_, y_, z_}; }
  Mat3 to_matrix() const;
  UnitQuaternion inverse() const;
  Vec3 rotate(const Vec3& v) const;

  friend UnitQuaternion operator*(const UnitQuaternion& a, const UnitQuaternion& b);
  friend bool operator==(const UnitQuaternion&, const UnitQuaternion&) = default;

 private:
  double w_ = 1.0, x_ = 0.0, y_ = 0.0, z_ = 0.0;
};

/// Rotation vector (radians * unit axis), |v| <= pi when produced by quat_log.
using RotationVector = Vec3;

RotationVector quat_log(const UnitQuaternion& base, const UnitQuaternion& q);
UnitQuaternion quat_exp(const UnitQuaternion& base, const RotationVector& v);

/// Rotation angle in [0, pi] between two orientations; exactly symmetric.
double geodesic_angle(const UnitQuaternion& a, const UnitQuaternion& b);

/// Matrix that maps body-frame tangent coordinates at `from` to body-frame
/// coordinates at `to` (the transported identity basis).
Mat3 transport_basis(const UnitQuaternion& from, const UnitQuaternion& to);

/// Re-expresses a tangent-space matrix (covariance) defined at `from` in the
/// tangent space at `to`.
Mat3 parallel_transport(const UnitQuaternion& from, const UnitQuaternion& to, const Mat3& m);

/// Weighted Karcher mean on S^3 using sign-aligned initialization.
UnitQuaternion quat_mean(const std::vector<UnitQuaternion>& qs, int max_iter = 50);

struct Pose {
  Vec position;
  UnitQuaternion orientation;

  Pose() = default;
  Pose(Vec p, UnitQuaternion q = {}) : position(std::move(p)), orientation(q) {}
  int dim() const { return static_cast<int>(position.size()); }
};

/// Positional distance plus w_rot times the geodesic orientation angle.
double pose_distance(const Pose& a, const Pose& b, double w_rot);

struct PoseTrajectory {
  std::vector<double> times;
  std::vector<Pose> poses;

  std::size_t size() const { return poses.size(); }
  bool empty() const { return poses.empty(); }
  int dim() const { return poses.empty() ? 0 : poses.front().dim(); }
  /// Positions stacked as a dim x N matrix.
  Mat positions() const;
};

/// Affine local coordinate system x_global = A x_local + b.
struct TaskFrame {
  Mat A;
  Vec b;
  bool rigid = true;

  static TaskFrame identity(int dim);
  static TaskFrame from_pose(const Pose& p);
  int dim() const { return static_cast<int>(b.size()); }
  /// Orientation carried by A: the identity in 2D, the polar rotation in 3D.
  UnitQuaternion rotation() const;
  /// Frame origin and rotation as a pose.
  Pose origin_pose() const;
};

Pose frame_apply(const TaskFrame& f, const Pose& p);
TaskFrame frame_invert(const TaskFrame& f);
/// Composition: frame_apply(frame_compose(g, f), p) == frame_apply(g, frame_apply(f, p)).
TaskFrame frame_compose(const TaskFrame& g, const TaskFrame& f);

PoseTrajectory frame_apply(const TaskFrame& f, const PoseTrajectory& traj);

}  // namespace vlmp
