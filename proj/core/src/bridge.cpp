#include "vlmp/bridge.hpp"

#include <Eigen/LU>
#include <cmath>
#include <limits>
#include <numbers>

#include "vlmp/error.hpp"
#include "vlmp/gaussian.hpp"

namespace vlmp {
namespace {

const Vec3& unique_label(const KeypointSet& set, KeypointLabel label) {
  const Vec3* found = nullptr;
  for (const auto& k : set.keypoints) {
    if (k.label != label) continue;
    if (found) throw Error(ErrorKind::InvalidArgument, std::string("keypoint set '") + set.object_id +
                                                           "' has more than one " + to_string(label));
    found = &k.point;
  }
  if (!found) {
    throw Error(ErrorKind::InvalidArgument,
                std::string("keypoint set '") + set.object_id + "' is missing " + to_string(label));
  }
  return *found;
}

// World axis least aligned with `z`, made orthogonal to it.
Vec3 fallback_orthogonal(const Vec3& z) {
  Eigen::Index i = 0;
  z.cwiseAbs().minCoeff(&i);
  Vec3 e = Vec3::Zero();
  e[i] = 1.0;
  return (e - e.dot(z) * z).normalized();
}

double xy_norm(const Vec3& v) { return std::hypot(v.x(), v.y()); }

double sample_variance(const std::vector<double>& xs, double mean) {
  double acc = 0.0;
  for (double x : xs) acc += (x - mean) * (x - mean);
  return acc / static_cast<double>(xs.size() - 1);
}

double angle_between(const Vec3& a, const Vec3& b) { return std::atan2(a.cross(b).norm(), a.dot(b)); }

}  // namespace

const char* to_string(KeypointLabel label) noexcept {
  switch (label) {
    case KeypointLabel::Interaction: return "K_i";
    case KeypointLabel::Positional1: return "K_p1";
    case KeypointLabel::Positional2: return "K_p2";
    case KeypointLabel::Boundary: return "K_b";
  }
  return "?";
}

KeypointLabel keypoint_label_from_string(const std::string& s) {
  if (s == "K_i") return KeypointLabel::Interaction;
  if (s == "K_p1") return KeypointLabel::Positional1;
  if (s == "K_p2") return KeypointLabel::Positional2;
  if (s == "K_b") return KeypointLabel::Boundary;
  throw Error(ErrorKind::Parse, "unknown keypoint label '" + s + "' (expected K_i, K_p1, K_p2 or K_b)");
}

const char* to_string(ObjectRole role) noexcept { return role == ObjectRole::Master ? "master" : "slave"; }

ObjectRole object_role_from_string(const std::string& s) {
  if (s == "master") return ObjectRole::Master;
  if (s == "slave") return ObjectRole::Slave;
  throw Error(ErrorKind::Parse, "unknown object role '" + s + "' (expected master or slave)");
}

void KeypointSet::validate() const {
  for (const auto& k : keypoints) {
    if (!k.point.allFinite()) {
      throw Error(ErrorKind::InvalidArgument, "keypoint set '" + object_id + "' has a non-finite coordinate");
    }
  }
  const Vec3& p1 = positional1();
  const Vec3& p2 = positional2();
  interaction();
  if ((p1 - p2).norm() == 0.0) {
    throw Error(ErrorKind::Degenerate, "keypoint set '" + object_id + "': K_p1 and K_p2 coincide");
  }
}

const Vec3& KeypointSet::interaction() const { return unique_label(*this, KeypointLabel::Interaction); }
const Vec3& KeypointSet::positional1() const { return unique_label(*this, KeypointLabel::Positional1); }
const Vec3& KeypointSet::positional2() const { return unique_label(*this, KeypointLabel::Positional2); }

std::vector<Vec3> KeypointSet::boundary() const {
  std::vector<Vec3> out;
  for (const auto& k : keypoints) {
    if (k.label == KeypointLabel::Boundary) out.push_back(k.point);
  }
  return out;
}

Vec3 KeypointSet::axis() const {
  const Vec3 d = positional1() - positional2();
  const double n = d.norm();
  if (n == 0.0) throw Error(ErrorKind::Degenerate, "keypoint set '" + object_id + "': K_p1 and K_p2 coincide");
  return d / n;
}

Pose object_pose(const KeypointSet& set) {
  const Vec3 z = set.axis();
  const Vec3& origin = set.positional2();
  Vec3 x = Vec3::Zero();
  const auto boundary = set.boundary();
  if (!boundary.empty()) {
    const Vec3 v = boundary.front() - origin;
    x = v - v.dot(z) * z;
  }
  const double scale = (set.positional1() - origin).norm();
  if (x.norm() <= 1e-9 * scale) {
    x = fallback_orthogonal(z);
  } else {
    x.normalize();
  }
  const Vec3 y = z.cross(x);
  Mat3 r;
  r.col(0) = x;
  r.col(1) = y;
  r.col(2) = z;
  return Pose(Vec(origin), UnitQuaternion(Eigen::Quaterniond(r)));
}

void CameraModel::validate() const {
  if (!intrinsics.allFinite() || !rotation.allFinite() || !translation.allFinite()) {
    throw Error(ErrorKind::InvalidArgument, "camera model has non-finite entries");
  }
  if (intrinsics(1, 0) != 0.0 || intrinsics(2, 0) != 0.0 || intrinsics(2, 1) != 0.0) {
    throw Error(ErrorKind::InvalidArgument, "camera intrinsics must be upper triangular");
  }
  if (!(intrinsics(0, 0) > 0.0) || !(intrinsics(1, 1) > 0.0) || !(intrinsics(2, 2) > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "camera intrinsics need positive diagonal entries");
  }
  if ((rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-9) {
    throw Error(ErrorKind::InvalidArgument, "camera rotation must be orthonormal");
  }
}

Vec3 backproject(const CameraModel& cam, double u, double v, double z) {
  if (!(z > 0.0)) throw Error(ErrorKind::InvalidArgument, "backproject: depth must be positive");
  const Vec3 ray = cam.intrinsics.triangularView<Eigen::Upper>().solve(Vec3(u, v, 1.0));
  return cam.rotation * (z * ray) + cam.translation;
}

Vec3 project(const CameraModel& cam, const Vec3& world) {
  const Vec3 pc = cam.rotation.transpose() * (world - cam.translation);
  const Vec3 h = cam.intrinsics * pc;
  if (!(h.z() > 0.0)) throw Error(ErrorKind::InvalidArgument, "project: point is behind the camera");
  return {h.x() / h.z(), h.y() / h.z(), h.z()};
}

Vec3 normalize_interaction_keypoint(const Vec3& o, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Eigen::Vector2d oa = (a - o).head<2>();
  const Eigen::Vector2d ob = (b - o).head<2>();
  const Eigen::Vector2d oc = (c - o).head<2>();
  const double na = oa.norm();
  if (!(na > 0.0)) throw Error(ErrorKind::Degenerate, "normalize: OA has no x-y extent");
  if (!(oc.norm() > 0.0)) throw Error(ErrorKind::Degenerate, "normalize: OC has no x-y extent");
  const double theta = std::atan2(oa.x() * ob.y() - oa.y() * ob.x(), oa.dot(ob));
  const double ratio = ob.norm() / na;
  const double ct = std::cos(theta);
  const double st = std::sin(theta);
  const Eigen::Vector2d od(ratio * (ct * oc.x() - st * oc.y()), ratio * (st * oc.x() + ct * oc.y()));
  return {o.x() + od.x(), o.y() + od.y(), c.z()};
}

MasterGeometry MasterGeometry::from(const KeypointSet& master) {
  MasterGeometry g;
  const Vec3& o = master.positional1();
  for (const auto& k : master.keypoints) {
    if (k.label != KeypointLabel::Positional1) g.offsets.emplace_back(k.label, k.point - o);
  }
  return g;
}

Vec3 correct_against_master(const Vec3& point, const MasterGeometry& from, const MasterGeometry& to) {
  if (xy_norm(point) == 0.0) return point;
  Vec3 acc = Vec3::Zero();
  double weight = 0.0;
  // Labels are matched by occurrence order (first K_b with first K_b, ...).
  std::vector<bool> used(to.offsets.size(), false);
  for (const auto& [label, a] : from.offsets) {
    for (std::size_t j = 0; j < to.offsets.size(); ++j) {
      if (used[j] || to.offsets[j].first != label) continue;
      used[j] = true;
      const Vec3& b = to.offsets[j].second;
      const double w = xy_norm(a);
      if (w > 1e-9 && xy_norm(b) > 1e-9) {
        acc += w * normalize_interaction_keypoint(Vec3::Zero(), a, b, point);
        weight += w;
      }
      break;
    }
  }
  return weight > 0.0 ? Vec3(acc / weight) : point;
}

InteractionStats learn_interaction_stats(const std::vector<FinalFrame>& final_frames) {
  const std::size_t n = final_frames.size();
  if (n < 2) throw Error(ErrorKind::InvalidArgument, "learn_interaction_stats: need at least two final frames");
  for (const auto& f : final_frames) {
    f.master.validate();
    f.slave.validate();
  }

  // Canonical target: mean keypoint offsets over all frames.
  InteractionStats stats;
  stats.num_frames = n;
  std::vector<MasterGeometry> geoms;
  for (const auto& f : final_frames) geoms.push_back(MasterGeometry::from(f.master));
  stats.canonical_master = geoms.front();
  for (std::size_t j = 0; j < stats.canonical_master.offsets.size(); ++j) {
    Vec3 sum = Vec3::Zero();
    for (const auto& g : geoms) {
      if (g.offsets.size() != geoms.front().offsets.size() || g.offsets[j].first != geoms.front().offsets[j].first) {
        throw Error(ErrorKind::InvalidArgument, "learn_interaction_stats: master keypoint layouts differ");
      }
      sum += g.offsets[j].second;
    }
    stats.canonical_master.offsets[j].second = sum / static_cast<double>(n);
  }

  std::vector<Vec3> positions;
  std::vector<double> angles;
  Vec3 offset_sum = Vec3::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& f = final_frames[i];
    const Vec3 rel = f.slave.interaction() - f.master.positional1();
    positions.push_back(correct_against_master(rel, geoms[i], stats.canonical_master));
    angles.push_back(angle_between(f.master.axis(), f.slave.axis()));
    const Pose sp = object_pose(f.slave);
    offset_sum += sp.orientation.inverse().rotate(f.slave.interaction() - Vec3(sp.position));
  }
  stats.slave_offset = offset_sum / static_cast<double>(n);

  Vec3 mean = Vec3::Zero();
  for (const auto& p : positions) mean += p;
  mean /= static_cast<double>(n);
  Vec3 var = Vec3::Zero();
  for (const auto& p : positions) var += (p - mean).cwiseAbs2();
  stats.pos_mean = mean;
  stats.pos_var = var / static_cast<double>(n - 1);

  double amean = 0.0;
  for (double a : angles) amean += a;
  amean /= static_cast<double>(n);
  stats.angle_mean = amean;
  stats.angle_var = sample_variance(angles, amean);
  return stats;
}

std::vector<Vec3> cone_candidates(const Vec3& axis, double angle, double step) {
  if (!(step > 0.0)) throw Error(ErrorKind::InvalidArgument, "cone_candidates: angle step must be positive");
  const Vec3 z = axis.normalized();
  if (angle == 0.0) return {axis};
  const Vec3 e1 = fallback_orthogonal(z);
  const Vec3 e2 = z.cross(e1);
  const double ca = std::cos(angle);
  const double sa = std::sin(angle);
  const auto count = static_cast<std::size_t>(std::ceil(2.0 * std::numbers::pi / step - 1e-9));
  std::vector<Vec3> out;
  out.reserve(count);
  for (std::size_t j = 0; j < count; ++j) {
    const double phi = step * static_cast<double>(j);
    out.push_back(ca * z + sa * (std::cos(phi) * e1 + std::sin(phi) * e2));
  }
  return out;
}

UnitQuaternion align_z(const UnitQuaternion& start, const Vec3& z) {
  const Vec3 z0 = start.rotate(Vec3::UnitZ());
  const UnitQuaternion swing(Eigen::Quaterniond::FromTwoVectors(z0, z));
  return swing * start;
}

EndposeResult endpose_estimate(const KeypointSet& master, const InteractionStats& stats, const Pose& start,
                               const EndposeOptions& options) {
  master.validate();
  if (start.dim() != 3) throw Error(ErrorKind::DimensionMismatch, "endpose_estimate: start pose must be 3D");
  if (options.n_pos_samples < 1) throw Error(ErrorKind::InvalidArgument, "endpose_estimate: n_pos_samples must be >= 1");
  if (!(options.angle_step > 0.0)) throw Error(ErrorKind::InvalidArgument, "endpose_estimate: angle_step must be > 0");
  if ((stats.pos_var.array() < 0.0).any() || stats.angle_var < 0.0) {
    throw Error(ErrorKind::InvalidArgument, "endpose_estimate: variances must be non-negative");
  }

  // (i) interaction keypoint target, corrected for this target's geometry.
  const MasterGeometry geometry = MasterGeometry::from(master);
  const Vec3& o = master.positional1();
  const Vec3 corrected_mean = o + correct_against_master(stats.pos_mean, stats.canonical_master, geometry);
  const GaussianState pos_dist(Vec(stats.pos_mean), Mat(stats.pos_var.asDiagonal()));
  const auto samples = gaussian_sample(pos_dist, options.seed, static_cast<std::size_t>(options.n_pos_samples));
  Vec3 u_target = corrected_mean;
  double best_gap = std::numeric_limits<double>::infinity();
  for (const auto& s : samples) {
    const Vec3 world = o + correct_against_master(Vec3(s), stats.canonical_master, geometry);
    const double gap = (world - corrected_mean).norm();
    if (gap < best_gap) {
      best_gap = gap;
      u_target = world;
    }
  }

  // (ii)-(iii) slave axis candidates on the cone about Z_master.
  const auto candidates = cone_candidates(master.axis(), stats.angle_mean, options.angle_step);
  EndposeResult result;
  result.interaction_target = u_target;
  result.num_candidates = candidates.size();
  result.distance = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < candidates.size(); ++j) {
    const UnitQuaternion q = align_z(start.orientation, candidates[j]);
    const Pose cand(Vec(u_target - q.rotate(stats.slave_offset)), q);
    const double d = pose_distance(cand, start, options.w_rot);
    if (d < result.distance) {
      result.distance = d;
      result.target = cand;
      result.z_slave = candidates[j];
      result.chosen = j;
    }
  }
  return result;
}

}  // namespace vlmp
