#include "vlmp/data.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include "vlmp/error.hpp"

namespace vlmp {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, ',')) out.push_back(trim(cur));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& s, const std::string& origin, std::size_t line, const char* field) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || s.empty()) {
    throw Error(ErrorKind::Parse, origin + ":" + std::to_string(line) + ": field '" + field + "': cannot parse '" + s + "'");
  }
  if (!std::isfinite(v)) {
    throw Error(ErrorKind::Parse, origin + ":" + std::to_string(line) + ": field '" + field + "': non-finite value");
  }
  return v;
}

std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

double min_jerk(double s) {
  s = std::clamp(s, 0.0, 1.0);
  return s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
}

Mat3 rot_z(double a) { return Eigen::AngleAxisd(a, Vec3::UnitZ()).toRotationMatrix(); }

}  // namespace

void KeypointFrameSequence::validate() const {
  if (frames.empty()) throw Error(ErrorKind::InvalidArgument, "keypoint sequence has no frames");
  const auto& first = frames.front().slave;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto& f = frames[i];
    if (!std::isfinite(f.t)) throw Error(ErrorKind::InvalidArgument, "keypoint sequence: non-finite timestamp");
    if (i > 0 && !(f.t > frames[i - 1].t)) {
      throw Error(ErrorKind::InvalidArgument, "keypoint sequence: timestamps must be strictly increasing");
    }
    f.slave.validate();
    if (f.slave.keypoints.size() != first.keypoints.size()) {
      throw Error(ErrorKind::InvalidArgument, "keypoint sequence: inconsistent slave labels across frames");
    }
    for (std::size_t k = 0; k < first.keypoints.size(); ++k) {
      if (f.slave.keypoints[k].label != first.keypoints[k].label) {
        throw Error(ErrorKind::InvalidArgument, "keypoint sequence: inconsistent slave labels across frames");
      }
    }
    if (f.master) f.master->validate();
  }
}

void DemoBundle::validate() const {
  if (demos.empty()) throw Error(ErrorKind::InvalidArgument, "bundle has no demonstrations");
  if (demo_frames.size() != demos.size()) {
    throw Error(ErrorKind::InvalidArgument, "bundle needs one set of task parameters per demo");
  }
  const int d = dim();
  for (const auto& demo : demos) {
    if (demo.dim() != d) throw Error(ErrorKind::DimensionMismatch, "bundle demos differ in dimension");
    if (demo.size() < 2 || demo.times.front() != 0.0 || demo.times.back() != 1.0) {
      throw Error(ErrorKind::InvalidArgument, "bundle demos must be time-normalized to [0, 1]");
    }
    for (const auto& p : demo.poses) {
      if (!p.position.allFinite()) throw Error(ErrorKind::InvalidArgument, "bundle demo has non-finite positions");
    }
  }
}

ExtractedDemo extract_demo_trajectory(const KeypointFrameSequence& seq) {
  seq.validate();
  ExtractedDemo out;
  for (const auto& f : seq.frames) {
    out.trajectory.times.push_back(f.t);
    out.trajectory.poses.push_back(object_pose(f.slave));
  }
  out.final_slave = seq.frames.back().slave;
  out.final_master = seq.frames.back().master;
  return out;
}

TaskParameters mean_endpoint_frames(const std::vector<PoseTrajectory>& demos) {
  if (demos.empty()) throw Error(ErrorKind::InvalidArgument, "mean_endpoint_frames: no demos");
  const int d = demos.front().dim();
  Vec start = Vec::Zero(d);
  Vec end = Vec::Zero(d);
  for (const auto& demo : demos) {
    start += demo.poses.front().position;
    end += demo.poses.back().position;
  }
  start /= static_cast<double>(demos.size());
  end /= static_cast<double>(demos.size());
  TaskFrame f1 = TaskFrame::identity(d);
  TaskFrame f2 = TaskFrame::identity(d);
  f1.b = start;
  f2.b = end;
  return {{f1, f2}};
}

DemoBundle parse_demo_csv(const std::string& text, const std::string& origin) {
  static const std::vector<std::string> kHeader2 = {"demo_id", "t", "x", "y"};
  static const std::vector<std::string> kHeader3 = {"demo_id", "t", "x", "y", "z", "qw", "qx", "qy", "qz"};
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  const std::vector<std::string>* header = nullptr;
  std::map<std::string, std::size_t> index;
  DemoBundle bundle;
  bundle.source = origin;
  auto where = [&](const char* field) {
    return origin + ":" + std::to_string(lineno) + (field ? std::string(": field '") + field + "'" : std::string());
  };
  while (std::getline(in, line)) {
    ++lineno;
    const std::string trimmed = trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    const auto fields = split_csv(trimmed);
    if (!header) {
      if (fields == kHeader2) {
        header = &kHeader2;
      } else if (fields == kHeader3) {
        header = &kHeader3;
      } else {
        throw Error(ErrorKind::Parse, where(nullptr) + ": expected header 'demo_id,t,x,y' or 'demo_id,t,x,y,z,qw,qx,qy,qz'");
      }
      continue;
    }
    if (fields.size() != header->size()) {
      throw Error(ErrorKind::Parse, where(nullptr) + ": expected " + std::to_string(header->size()) + " fields, got " +
                                        std::to_string(fields.size()));
    }
    if (fields[0].empty()) throw Error(ErrorKind::Parse, where("demo_id") + ": empty");
    std::vector<double> v(fields.size());
    for (std::size_t k = 1; k < fields.size(); ++k) v[k] = parse_number(fields[k], origin, lineno, (*header)[k].c_str());
    Pose pose;
    if (header == &kHeader2) {
      pose.position = Eigen::Vector2d(v[2], v[3]);
    } else {
      pose.position = Vec3(v[2], v[3], v[4]);
      try {
        pose.orientation = UnitQuaternion(v[5], v[6], v[7], v[8]);
      } catch (const Error& e) {
        throw Error(ErrorKind::Parse, where("qw") + ": " + e.what());
      }
    }
    auto [it, inserted] = index.try_emplace(fields[0], bundle.demos.size());
    if (inserted) {
      bundle.demos.emplace_back();
      bundle.demo_ids.push_back(fields[0]);
    }
    auto& demo = bundle.demos[it->second];
    if (!demo.times.empty() && !(v[1] > demo.times.back())) {
      throw Error(ErrorKind::Parse, where("t") + ": must increase within demo '" + fields[0] + "'");
    }
    demo.times.push_back(v[1]);
    demo.poses.push_back(std::move(pose));
  }
  if (!header) throw Error(ErrorKind::Parse, origin + ": missing header");
  if (bundle.demos.empty()) throw Error(ErrorKind::Parse, origin + ": no samples");
  for (std::size_t i = 0; i < bundle.demos.size(); ++i) {
    if (bundle.demos[i].size() < 2) {
      throw Error(ErrorKind::Parse, origin + ": demo '" + bundle.demo_ids[i] + "' has fewer than two samples");
    }
    bundle.demos[i] = normalize_time(bundle.demos[i]);
  }
  if (header == &kHeader2) {
    bundle.demo_frames.assign(bundle.demos.size(), mean_endpoint_frames(bundle.demos));
  } else {
    for (const auto& d : bundle.demos) bundle.demo_frames.push_back(endpoint_frames(d));
  }
  return bundle;
}

DemoBundle load_demo_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_demo_csv(ss.str(), path.string());
}

std::string format_demo_csv(const DemoBundle& bundle) {
  const int d = bundle.dim();
  if (d != 2 && d != 3) throw Error(ErrorKind::DimensionMismatch, "demo CSV holds 2D or 3D demos only");
  std::string out = d == 2 ? "demo_id,t,x,y\n" : "demo_id,t,x,y,z,qw,qx,qy,qz\n";
  for (std::size_t n = 0; n < bundle.demos.size(); ++n) {
    const std::string id = n < bundle.demo_ids.size() ? bundle.demo_ids[n] : std::to_string(n);
    const auto& demo = bundle.demos[n];
    for (std::size_t i = 0; i < demo.size(); ++i) {
      const Pose& p = demo.poses[i];
      out += id + "," + format_double(demo.times[i]);
      for (int k = 0; k < d; ++k) out += "," + format_double(p.position[k]);
      if (d == 3) {
        const Eigen::Vector4d q = p.orientation.coeffs_wxyz();
        for (int k = 0; k < 4; ++k) out += "," + format_double(q[k]);
      }
      out += "\n";
    }
  }
  return out;
}

void save_demo_csv(const DemoBundle& bundle, const std::filesystem::path& path) {
  const std::string text = format_demo_csv(bundle);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error(ErrorKind::Io, "failed writing '" + path.string() + "'");
}

DemoBundle make_bundle(std::vector<PoseTrajectory> demos, std::vector<FinalFrame> final_frames) {
  DemoBundle b;
  for (std::size_t i = 0; i < demos.size(); ++i) {
    b.demos.push_back(normalize_time(demos[i]));
    b.demo_ids.push_back(std::to_string(i));
    b.demo_frames.push_back(endpoint_frames(b.demos.back()));
  }
  b.final_frames = std::move(final_frames);
  b.validate();
  return b;
}

double workspace_diameter(const std::vector<PoseTrajectory>& demos) {
  std::vector<Vec> pts;
  for (const auto& d : demos) {
    for (const auto& p : d.poses) pts.push_back(p.position);
  }
  double best = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) best = std::max(best, (pts[i] - pts[j]).squaredNorm());
  }
  return std::sqrt(best);
}

TaskParameters perturb_task(const TaskParameters& frames, std::uint64_t seed, double translation_scale,
                            double rotation_scale, double diameter) {
  frames.validate();
  if (translation_scale < 0.0 || rotation_scale < 0.0 || diameter < 0.0) {
    throw Error(ErrorKind::InvalidArgument, "perturb_task: scales must be non-negative");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  TaskParameters out = frames;
  const int d = frames.dim();
  for (auto& f : out.frames) {
    Vec dir(d);
    for (int k = 0; k < d; ++k) dir[k] = normal(rng);
    const double radius = translation_scale * diameter * unit(rng);
    const double angle = rotation_scale * (2.0 * unit(rng) - 1.0);
    Vec3 axis(normal(rng), normal(rng), normal(rng));
    if (radius > 0.0 && dir.norm() > 0.0) f.b += radius * dir.normalized();
    if (angle != 0.0) {
      Mat r = Mat::Identity(d, d);
      if (d == 2) {
        r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
      } else if (d == 3) {
        r = Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
      }
      f.A = r * f.A;
    }
  }
  return out;
}

namespace synth {

std::vector<PoseTrajectory> gshape_demos(std::size_t count, std::uint64_t seed, std::size_t points) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<PoseTrajectory> demos;
  for (std::size_t n = 0; n < count; ++n) {
    const double radius = 15.0 * (1.0 + 0.06 * u(rng));
    const double aspect = 1.0 + 0.08 * u(rng);
    const double start_angle = (50.0 + 8.0 * u(rng)) * std::numbers::pi / 180.0;
    const double bar = 0.5 + 0.06 * u(rng);
    const double wobble_amp = 0.4 * u(rng);
    const double wobble_phase = std::numbers::pi * u(rng);

    // Outline: open arc counter-clockwise round to the right side, then the
    // inward bar of the G.
    std::vector<Eigen::Vector2d> poly;
    const double end_angle = 2.0 * std::numbers::pi;
    for (int i = 0; i <= 240; ++i) {
      const double a = start_angle + (end_angle - start_angle) * i / 240.0;
      const double w = 1.0 + wobble_amp / radius * std::sin(3.0 * a + wobble_phase);
      poly.emplace_back(radius * w * std::cos(a), radius * aspect * w * std::sin(a));
    }
    const Eigen::Vector2d corner = poly.back();
    for (int i = 1; i <= 60; ++i) poly.emplace_back(corner.x() - bar * radius * i / 60.0, corner.y());
    // Chaikin corner cutting rounds the junction of arc and bar.
    for (int pass = 0; pass < 3; ++pass) {
      std::vector<Eigen::Vector2d> next{poly.front()};
      for (std::size_t i = 0; i + 1 < poly.size(); ++i) {
        next.push_back(0.75 * poly[i] + 0.25 * poly[i + 1]);
        next.push_back(0.25 * poly[i] + 0.75 * poly[i + 1]);
      }
      next.push_back(poly.back());
      poly = std::move(next);
    }
    Mat pm(2, static_cast<Eigen::Index>(poly.size()));
    for (std::size_t i = 0; i < poly.size(); ++i) pm.col(static_cast<Eigen::Index>(i)) = poly[i];
    // Arc-length lookup with a minimum-jerk speed profile.
    std::vector<double> s(poly.size(), 0.0);
    for (std::size_t i = 1; i < poly.size(); ++i) s[i] = s[i - 1] + (poly[i] - poly[i - 1]).norm();
    PoseTrajectory demo;
    const Eigen::Vector2d shift = -poly.back();
    for (std::size_t k = 0; k < points; ++k) {
      const double tau = static_cast<double>(k) / static_cast<double>(points - 1);
      const double target = s.back() * min_jerk(tau);
      const auto it = std::lower_bound(s.begin(), s.end(), target);
      std::size_t hi = std::min<std::size_t>(static_cast<std::size_t>(it - s.begin()), s.size() - 1);
      if (hi == 0) hi = 1;
      const double seg = s[hi] - s[hi - 1];
      const double a = seg > 0.0 ? (target - s[hi - 1]) / seg : 0.0;
      const Eigen::Vector2d p = (1.0 - a) * poly[hi - 1] + a * poly[hi] + shift;
      demo.times.push_back(tau);
      demo.poses.emplace_back(Vec(p));
    }
    demos.push_back(std::move(demo));
  }
  return demos;
}

KeypointSet mug_keypoints(const Pose& pose, const MugGeometry& g, ObjectRole role, const std::string& id) {
  const Mat3 r = pose.orientation.to_matrix();
  const Vec3 o = pose.position;
  auto at = [&](double x, double y, double z) { return Vec3(o + r * Vec3(x, y, z)); };
  KeypointSet set;
  set.object_id = id;
  set.role = role;
  set.keypoints = {
      {KeypointLabel::Interaction, at(-g.radius, 0.0, g.height)},
      {KeypointLabel::Positional1, at(0.0, 0.0, g.height)},
      {KeypointLabel::Positional2, at(0.0, 0.0, 0.0)},
      {KeypointLabel::Boundary, at(g.handle, 0.0, 0.5 * g.height)},
  };
  return set;
}

namespace {

struct SceneDraw {
  PouringScene scene;
  Pose master_pose;
  double master_scale = 1.0;
};

SceneDraw draw_scene(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  SceneDraw d;
  const double master_yaw = std::numbers::pi * u(rng);
  d.master_scale = 1.0 + 0.15 * u(rng);
  const Vec3 master_pos(0.45 + 0.05 * u(rng), 0.05 * u(rng), 0.0);
  d.master_pose = Pose(Vec(master_pos), UnitQuaternion(Eigen::Quaterniond(rot_z(master_yaw))));
  MugGeometry mg;
  mg.height *= d.master_scale;
  mg.radius *= d.master_scale;
  mg.handle *= d.master_scale;
  d.scene.master = mug_keypoints(d.master_pose, mg, ObjectRole::Master, "master");

  const double dist = 0.30 + 0.04 * u(rng);
  const double bearing = std::numbers::pi + 0.5 * u(rng);
  const Vec3 start_pos = master_pos + dist * Vec3(std::cos(bearing), std::sin(bearing), 0.0);
  const double start_yaw = std::numbers::pi * u(rng);
  d.scene.start = Pose(Vec(start_pos), UnitQuaternion(Eigen::Quaterniond(rot_z(start_yaw))));
  return d;
}

}  // namespace

// Keypoint tracking noise (standard deviation, metres).
constexpr double kKeypointNoise = 5e-4;

PouringScene pouring_scene(std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x5eedcafeULL);
  return draw_scene(rng).scene;
}

std::vector<PouringDemo> pouring_demos(std::size_t count, std::uint64_t seed, std::size_t points) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<PouringDemo> out;
  for (std::size_t n = 0; n < count; ++n) {
    const SceneDraw d = draw_scene(rng);
    const Mat3 master_r = d.master_pose.orientation.to_matrix();
    const MugGeometry sg = d.scene.slave_geom;
    // Lip above the master mouth on the master's +x side, tilted ~100 deg
    // towards the master.
    const Vec3 rel(0.5 * 0.04 * d.master_scale + 0.002 * u(rng), 0.002 * u(rng), 0.03 + 0.002 * u(rng));
    const Vec3 lip_target = d.scene.master.positional1() + master_r * rel;
    const double alpha = 1.75 + 0.03 * u(rng);
    const Vec3 towards = -master_r.col(0);
    const Vec3 z_end = std::cos(alpha) * Vec3::UnitZ() + std::sin(alpha) * towards;
    const UnitQuaternion q_end = align_z(d.scene.start.orientation, z_end);
    const Vec3 base_end = lip_target - q_end.rotate(Vec3(-sg.radius, 0.0, sg.height));
    const Pose end(Vec(base_end), q_end);

    PouringDemo demo;
    demo.scene = d.scene;
    const double lift = 0.12 + 0.02 * u(rng);
    const double duration = 4.0 + 0.5 * u(rng);
    const Vec3 p0 = d.scene.start.position;
    for (std::size_t k = 0; k < points; ++k) {
      const double tau = static_cast<double>(k) / static_cast<double>(points - 1);
      const double s = min_jerk(tau);
      const Vec3 p = (1.0 - s) * p0 + s * base_end + lift * std::sin(std::numbers::pi * s) * Vec3::UnitZ();
      const double tilt = min_jerk((tau - 0.35) / 0.65);
      const RotationVector v = quat_log(d.scene.start.orientation, q_end);
      const Pose pose(Vec(p), quat_exp(d.scene.start.orientation, tilt * v));
      KeypointFrame frame;
      frame.t = duration * tau;
      frame.slave = mug_keypoints(pose, sg, ObjectRole::Slave, "slave");
      for (auto& kp : frame.slave.keypoints) kp.point += kKeypointNoise * Vec3(normal(rng), normal(rng), normal(rng));
      if (k + 1 == points) frame.master = d.scene.master;
      demo.sequence.frames.push_back(std::move(frame));
    }
    out.push_back(std::move(demo));
  }
  return out;
}

}  // namespace synth

}  // namespace vlmp
