#pragma once

// Keypoint-constrained terminal pose estimation.
//
// Objects carry labeled 3D keypoints: one interaction keypoint K_i, two
// positional keypoints K_p1 (e.g. mouth centre) and K_p2 (base centre) that
// define the object axis Z = unit(K_p1 - K_p2), and optional boundary
// keypoints K_b. The terminal pose of a skill is inferred from statistics of
// the interaction state between the manipulated ("slave") and target
// ("master") objects in the final demonstration frames.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vlmp/manifold.hpp"

namespace vlmp {

enum class KeypointLabel { Interaction, Positional1, Positional2, Boundary };
enum class ObjectRole { Master, Slave };

const char* to_string(KeypointLabel label) noexcept;
KeypointLabel keypoint_label_from_string(const std::string& s);
const char* to_string(ObjectRole role) noexcept;
ObjectRole object_role_from_string(const std::string& s);

struct Keypoint {
  KeypointLabel label = KeypointLabel::Interaction;
  Vec3 point = Vec3::Zero();
};

struct KeypointSet {
  std::string object_id;
  ObjectRole role = ObjectRole::Slave;
  std::vector<Keypoint> keypoints;

  /// Throws unless there is exactly one K_i, K_p1 and K_p2, all keypoints are
  /// finite and K_p1 != K_p2.
  void validate() const;
  const Vec3& interaction() const;
  const Vec3& positional1() const;
  const Vec3& positional2() const;
  std::vector<Vec3> boundary() const;
  /// Unit axis from K_p2 to K_p1.
  Vec3 axis() const;
};

/// Object pose from keypoints: origin K_p2, z along K_p2 -> K_p1, x along the
/// first boundary keypoint projected orthogonal to z (a fixed world axis when
/// there is none), y = z x x.
Pose object_pose(const KeypointSet& set);

struct CameraModel {
  Mat3 intrinsics = Mat3::Identity();
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  void validate() const;
};

/// Pinhole back-projection: R (z K^-1 [u v 1]^T) + t.
Vec3 backproject(const CameraModel& cam, double u, double v, double z);
/// Inverse of backproject: world point -> (u, v, z).
Vec3 project(const CameraModel& cam, const Vec3& world);

/// Corrects the interaction keypoint C for a change of target geometry about
/// O, working in the x-y projection: the reference keypoint moved from A to
/// B, so C is rotated by the signed angle A->B about +z and scaled by
/// |OB|/|OA|. The height of C is kept.
Vec3 normalize_interaction_keypoint(const Vec3& o, const Vec3& a, const Vec3& b, const Vec3& c);

/// Target keypoints relative to K_p1, used as the canonical instance.
struct MasterGeometry {
  std::vector<std::pair<KeypointLabel, Vec3>> offsets;  // labels other than K_p1

  static MasterGeometry from(const KeypointSet& master);
};

/// Corrects `point` (relative to K_p1) from geometry `from` to geometry `to`.
/// Each shared keypoint whose x-y projection is non-degenerate yields a
/// correction; they are averaged with weights |OA_xy|.
Vec3 correct_against_master(const Vec3& point, const MasterGeometry& from, const MasterGeometry& to);

struct InteractionStats {
  Vec3 pos_mean = Vec3::Zero();  // relative to the canonical master's K_p1
  Vec3 pos_var = Vec3::Zero();
  double angle_mean = 0.0;       // angle between Z_master and Z_slave
  double angle_var = 0.0;
  MasterGeometry canonical_master;
  /// Slave interaction keypoint in the slave object frame.
  Vec3 slave_offset = Vec3::Zero();
  std::size_t num_frames = 0;
};

struct FinalFrame {
  KeypointSet master;
  KeypointSet slave;
};

InteractionStats learn_interaction_stats(const std::vector<FinalFrame>& final_frames);

struct EndposeOptions {
  std::uint64_t seed = 0;
  int n_pos_samples = 16;
  double angle_step = 2.0 * 3.14159265358979323846 / 180.0;
  double w_rot = 0.1;
};

struct EndposeResult {
  Pose target;              // P_target (slave object pose)
  Vec3 interaction_target;  // u_target in world coordinates
  Vec3 z_slave;             // chosen slave axis
  std::size_t num_candidates = 0;
  std::size_t chosen = 0;
  double distance = 0.0;
};

/// Unit vectors on the cone at `angle` about `axis`, azimuth stepped by
/// `step` from a fixed reference direction. A zero angle yields `axis` only.
std::vector<Vec3> cone_candidates(const Vec3& axis, double angle, double step);

/// Orientation whose z-axis is `z`, reached from `start` by the minimal rotation.
UnitQuaternion align_z(const UnitQuaternion& start, const Vec3& z);

EndposeResult endpose_estimate(const KeypointSet& master, const InteractionStats& stats, const Pose& start,
                               const EndposeOptions& options);

}  // namespace vlmp
