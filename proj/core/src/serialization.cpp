#include "vlmp/serialization.hpp"

#include <cmath>

#include "json.hpp"
#include "vlmp/error.hpp"

namespace vlmp {
namespace {

using json = nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw Error(ErrorKind::Parse, (path.empty() ? std::string("document") : path) + ": " + what);
}

json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Parse, std::string("invalid JSON: ") + e.what());
  }
}

const json& field(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  const auto it = j.find(key);
  if (it == j.end()) fail(path, "missing field '" + key + "'");
  return *it;
}

double num(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(path, "non-finite number");
  return v;
}

double num(const json& j, const std::string& key, const std::string& path) {
  return num(field(j, key, path), path + "." + key);
}

std::uint64_t u64(const json& j, const std::string& key, const std::string& path) {
  const json& v = field(j, key, path);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
    fail(path + "." + key, "expected a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

int integer(const json& j, const std::string& key, const std::string& path) {
  const json& v = field(j, key, path);
  if (!v.is_number_integer()) fail(path + "." + key, "expected an integer");
  return v.get<int>();
}

bool boolean(const json& j, const std::string& key, const std::string& path) {
  const json& v = field(j, key, path);
  if (!v.is_boolean()) fail(path + "." + key, "expected a boolean");
  return v.get<bool>();
}

std::string str(const json& j, const std::string& key, const std::string& path) {
  const json& v = field(j, key, path);
  if (!v.is_string()) fail(path + "." + key, "expected a string");
  return v.get<std::string>();
}

const json& array(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array");
  return j;
}

const json& array(const json& j, const std::string& key, const std::string& path) {
  return array(field(j, key, path), path + "." + key);
}

std::string at(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

json vec_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Vec read_vec(const json& j, const std::string& path, Eigen::Index expected = -1) {
  array(j, path);
  if (expected >= 0 && static_cast<Eigen::Index>(j.size()) != expected) {
    fail(path, "expected " + std::to_string(expected) + " entries");
  }
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = num(j[i], at(path, i));
  return v;
}

Vec3 read_vec3(const json& j, const std::string& path) { return read_vec(j, path, 3); }

json mat_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(vec_json(m.row(r).transpose()));
  return rows;
}

Mat read_mat(const json& j, const std::string& path, Eigen::Index rows = -1, Eigen::Index cols = -1) {
  array(j, path);
  if (rows >= 0 && static_cast<Eigen::Index>(j.size()) != rows) fail(path, "expected " + std::to_string(rows) + " rows");
  if (j.empty()) return Mat(0, std::max<Eigen::Index>(cols, 0));
  const Eigen::Index c = cols >= 0 ? cols : static_cast<Eigen::Index>(array(j[0], at(path, 0)).size());
  Mat m(static_cast<Eigen::Index>(j.size()), c);
  for (std::size_t r = 0; r < j.size(); ++r) m.row(static_cast<Eigen::Index>(r)) = read_vec(j[r], at(path, r), c).transpose();
  return m;
}

json quat_json(const UnitQuaternion& q) { return json::array({q.w(), q.x(), q.y(), q.z()}); }

UnitQuaternion read_quat(const json& j, const std::string& path) {
  const Vec v = read_vec(j, path, 4);
  try {
    return UnitQuaternion(v[0], v[1], v[2], v[3]);
  } catch (const Error& e) {
    fail(path, e.what());
  }
}

json pose_json(const Pose& p) {
  json j{{"position", vec_json(p.position)}};
  if (p.dim() == 3) j["orientation"] = quat_json(p.orientation);
  return j;
}

Pose read_pose(const json& j, const std::string& path) {
  Pose p(read_vec(field(j, "position", path), path + ".position"));
  if (j.contains("orientation")) p.orientation = read_quat(j["orientation"], path + ".orientation");
  return p;
}

json frame_json(const TaskFrame& f) { return {{"A", mat_json(f.A)}, {"b", vec_json(f.b)}, {"rigid", f.rigid}}; }

TaskFrame read_frame(const json& j, const std::string& path) {
  TaskFrame f;
  f.b = read_vec(field(j, "b", path), path + ".b");
  f.A = read_mat(field(j, "A", path), path + ".A", f.b.size(), f.b.size());
  f.rigid = j.contains("rigid") ? boolean(j, "rigid", path) : true;
  return f;
}

json params_json(const TaskParameters& t) {
  json a = json::array();
  for (const auto& f : t.frames) a.push_back(frame_json(f));
  return a;
}

TaskParameters read_params(const json& j, const std::string& path) {
  TaskParameters t;
  array(j, path);
  for (std::size_t i = 0; i < j.size(); ++i) t.frames.push_back(read_frame(j[i], at(path, i)));
  try {
    t.validate();
  } catch (const Error& e) {
    fail(path, e.what());
  }
  return t;
}

json gmm_json(const GmmModel& m) {
  json means = json::array();
  json covs = json::array();
  for (const auto& v : m.means) means.push_back(vec_json(v));
  for (const auto& c : m.covs) covs.push_back(mat_json(c));
  return {{"num_components", m.num_components()},
          {"joint_dim", m.joint_dim()},
          {"seed", m.seed},
          {"t_min", m.t_min},
          {"t_max", m.t_max},
          {"priors", m.priors},
          {"means", means},
          {"covs", covs}};
}

GmmModel read_gmm(const json& j, const std::string& path) {
  GmmModel m;
  m.seed = u64(j, "seed", path);
  m.t_min = num(j, "t_min", path);
  m.t_max = num(j, "t_max", path);
  const Vec priors = read_vec(field(j, "priors", path), path + ".priors");
  m.priors.assign(priors.data(), priors.data() + priors.size());
  const json& means = array(j, "means", path);
  const json& covs = array(j, "covs", path);
  if (means.size() != m.priors.size() || covs.size() != m.priors.size()) {
    fail(path, "priors, means and covs differ in length");
  }
  for (std::size_t k = 0; k < means.size(); ++k) {
    m.means.push_back(read_vec(means[k], at(path + ".means", k)));
    const auto d = m.means.back().size();
    if (d != m.means.front().size()) fail(at(path + ".means", k), "inconsistent dimension");
    m.covs.push_back(read_mat(covs[k], at(path + ".covs", k), d, d));
  }
  return m;
}

json reference_json(const ReferenceTrajectory& r) {
  json means = json::array();
  json covs = json::array();
  for (const auto& s : r.states) {
    means.push_back(vec_json(s.mean()));
    covs.push_back(mat_json(s.cov()));
  }
  std::vector<bool> ex(r.extrapolated.begin(), r.extrapolated.end());
  return {{"times", r.times}, {"means", means}, {"covs", covs}, {"extrapolated", ex}};
}

ReferenceTrajectory read_reference(const json& j, const std::string& path) {
  ReferenceTrajectory r;
  const Vec t = read_vec(field(j, "times", path), path + ".times");
  r.times.assign(t.data(), t.data() + t.size());
  const json& means = array(j, "means", path);
  const json& covs = array(j, "covs", path);
  if (means.size() != r.times.size() || covs.size() != r.times.size()) fail(path, "times, means and covs differ in length");
  for (std::size_t i = 0; i < means.size(); ++i) {
    Vec mu = read_vec(means[i], at(path + ".means", i));
    Mat cov = read_mat(covs[i], at(path + ".covs", i), mu.size(), mu.size());
    r.states.emplace_back(std::move(mu), std::move(cov));
  }
  if (j.contains("extrapolated")) {
    const json& ex = array(j, "extrapolated", path);
    if (ex.size() != r.times.size()) fail(path + ".extrapolated", "length differs from times");
    for (const auto& e : ex) {
      if (!e.is_boolean()) fail(path + ".extrapolated", "expected booleans");
      r.extrapolated.push_back(e.get<bool>());
    }
  } else {
    r.extrapolated.assign(r.times.size(), false);
  }
  try {
    r.validate();
  } catch (const Error& e) {
    fail(path, e.what());
  }
  return r;
}

json kernel_json(const KernelParams& k) { return {{"lengthscale", k.lengthscale}, {"variance", k.variance}}; }

KernelParams read_kernel(const json& j, const std::string& path) {
  KernelParams k;
  k.lengthscale = num(j, "lengthscale", path);
  k.variance = num(j, "variance", path);
  if (!(k.lengthscale > 0.0) || !(k.variance > 0.0)) fail(path, "kernel parameters must be positive");
  return k;
}

json config_json(const LfeKmpConfig& c) {
  return {{"num_components", c.num_components},
          {"seed", c.seed},
          {"em_max_iter", c.em_max_iter},
          {"cov_floor", c.cov_floor},
          {"one_shot_cov_floor", c.one_shot_cov_floor},
          {"n_reference", c.n_reference},
          {"tune_kernel", c.tune_kernel},
          {"kernel", kernel_json(c.kernel)},
          {"kernel_grid", {{"lengthscales", c.kernel_grid.lengthscales}, {"variances", c.kernel_grid.variances}}},
          {"lambda_mean", c.lambda_mean},
          {"lambda_cov", c.lambda_cov},
          {"epsilon", c.epsilon},
          {"resample_count", c.resample_count},
          {"window", c.window},
          {"anchors_in_all_frames", c.anchors_in_all_frames},
          {"orientation_iterations", c.orientation_iterations}};
}

std::vector<double> read_doubles(const json& j, const std::string& path) {
  const Vec v = read_vec(j, path);
  return {v.data(), v.data() + v.size()};
}

LfeKmpConfig read_config(const json& j, const std::string& path) {
  LfeKmpConfig c;
  c.num_components = integer(j, "num_components", path);
  c.seed = u64(j, "seed", path);
  c.em_max_iter = integer(j, "em_max_iter", path);
  c.cov_floor = num(j, "cov_floor", path);
  c.one_shot_cov_floor = num(j, "one_shot_cov_floor", path);
  c.n_reference = u64(j, "n_reference", path);
  c.tune_kernel = boolean(j, "tune_kernel", path);
  c.kernel = read_kernel(field(j, "kernel", path), path + ".kernel");
  const json& grid = field(j, "kernel_grid", path);
  c.kernel_grid.lengthscales = read_doubles(field(grid, "lengthscales", path + ".kernel_grid"), path + ".kernel_grid.lengthscales");
  c.kernel_grid.variances = read_doubles(field(grid, "variances", path + ".kernel_grid"), path + ".kernel_grid.variances");
  c.lambda_mean = num(j, "lambda_mean", path);
  c.lambda_cov = num(j, "lambda_cov", path);
  c.epsilon = num(j, "epsilon", path);
  c.resample_count = integer(j, "resample_count", path);
  c.window = num(j, "window", path);
  c.anchors_in_all_frames = boolean(j, "anchors_in_all_frames", path);
  c.orientation_iterations = integer(j, "orientation_iterations", path);
  try {
    c.validate();
  } catch (const Error& e) {
    fail(path, e.what());
  }
  return c;
}

json demo_frames_json(const std::vector<TaskParameters>& frames) {
  json a = json::array();
  for (const auto& t : frames) a.push_back(params_json(t));
  return a;
}

std::vector<TaskParameters> read_demo_frames(const json& j, const std::string& path) {
  std::vector<TaskParameters> out;
  array(j, path);
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(read_params(j[i], at(path, i)));
  return out;
}

json header(ModelKind kind) { return {{"format_version", kModelFormatVersion}, {"kind", to_string(kind)}}; }

void check_header(const json& j, ModelKind kind) {
  const int version = integer(j, "format_version", "");
  if (version != kModelFormatVersion) fail("format_version", "unsupported version " + std::to_string(version));
  const std::string k = str(j, "kind", "");
  if (k != to_string(kind)) fail("kind", "expected '" + std::string(to_string(kind)) + "', got '" + k + "'");
}

json keypoints_json(const KeypointSet& s) {
  json kps = json::array();
  for (const auto& k : s.keypoints) kps.push_back({{"label", to_string(k.label)}, {"xyz", vec_json(k.point)}});
  return {{"id", s.object_id}, {"role", to_string(s.role)}, {"keypoints", kps}};
}

KeypointSet read_keypoints(const json& j, const std::string& path, const std::optional<CameraModel>& cam) {
  KeypointSet s;
  s.object_id = j.contains("id") ? str(j, "id", path) : std::string();
  try {
    const std::string role = str(j, "role", path);
    try {
      s.role = object_role_from_string(role);
    } catch (const Error& e) {
      fail(path + ".role", e.what());
    }
    const json& kps = array(j, "keypoints", path);
    for (std::size_t i = 0; i < kps.size(); ++i) {
      const std::string p = at(path + ".keypoints", i);
      Keypoint k;
      const std::string label = str(kps[i], "label", p);
      try {
        k.label = keypoint_label_from_string(label);
      } catch (const Error& e) {
        fail(p + ".label", e.what());
      }
      if (kps[i].contains("xyz")) {
        k.point = read_vec3(kps[i]["xyz"], p + ".xyz");
      } else if (kps[i].contains("uvz")) {
        if (!cam) fail(p + ".uvz", "pixel keypoints need a camera block");
        const Vec3 uvz = read_vec3(kps[i]["uvz"], p + ".uvz");
        k.point = backproject(*cam, uvz[0], uvz[1], uvz[2]);
      } else {
        fail(p, "needs 'xyz' or 'uvz'");
      }
      s.keypoints.push_back(k);
    }
    s.validate();
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Parse) throw;
    fail(path, e.what());
  }
  return s;
}

std::optional<CameraModel> read_camera(const json& j) {
  if (!j.contains("camera")) return std::nullopt;
  const json& c = j["camera"];
  CameraModel cam;
  cam.intrinsics = read_mat(field(c, "intrinsics", "camera"), "camera.intrinsics", 3, 3);
  if (c.contains("rotation")) cam.rotation = read_mat(c["rotation"], "camera.rotation", 3, 3);
  if (c.contains("translation")) cam.translation = read_vec3(c["translation"], "camera.translation");
  try {
    cam.validate();
  } catch (const Error& e) {
    fail("camera", e.what());
  }
  return cam;
}

json final_frames_json(const std::vector<FinalFrame>& frames) {
  json a = json::array();
  for (const auto& f : frames) a.push_back({{"master", keypoints_json(f.master)}, {"slave", keypoints_json(f.slave)}});
  return a;
}

std::vector<FinalFrame> read_final_frames(const json& j, const std::string& path, const std::optional<CameraModel>& cam) {
  std::vector<FinalFrame> out;
  array(j, path);
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = at(path, i);
    out.push_back({read_keypoints(field(j[i], "master", p), p + ".master", cam),
                   read_keypoints(field(j[i], "slave", p), p + ".slave", cam)});
  }
  return out;
}

json stats_json(const InteractionStats& s) {
  json offsets = json::array();
  for (const auto& [label, v] : s.canonical_master.offsets) offsets.push_back({{"label", to_string(label)}, {"xyz", vec_json(v)}});
  return {{"pos_mean", vec_json(s.pos_mean)},   {"pos_var", vec_json(s.pos_var)},
          {"angle_mean", s.angle_mean},         {"angle_var", s.angle_var},
          {"canonical_master", offsets},        {"slave_offset", vec_json(s.slave_offset)},
          {"num_frames", s.num_frames}};
}

InteractionStats read_stats(const json& j, const std::string& path) {
  InteractionStats s;
  s.pos_mean = read_vec3(field(j, "pos_mean", path), path + ".pos_mean");
  s.pos_var = read_vec3(field(j, "pos_var", path), path + ".pos_var");
  s.angle_mean = num(j, "angle_mean", path);
  s.angle_var = num(j, "angle_var", path);
  s.slave_offset = read_vec3(field(j, "slave_offset", path), path + ".slave_offset");
  s.num_frames = u64(j, "num_frames", path);
  const json& offsets = array(j, "canonical_master", path);
  for (std::size_t i = 0; i < offsets.size(); ++i) {
    const std::string p = at(path + ".canonical_master", i);
    try {
      s.canonical_master.offsets.emplace_back(keypoint_label_from_string(str(offsets[i], "label", p)),
                                              read_vec3(field(offsets[i], "xyz", p), p + ".xyz"));
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::Parse) throw;
      fail(p, e.what());
    }
  }
  if ((s.pos_var.array() < 0.0).any() || s.angle_var < 0.0) fail(path, "variances must be non-negative");
  return s;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace

const char* to_string(ModelKind kind) noexcept {
  switch (kind) {
    case ModelKind::LfeKmp: return "lfekmp";
    case ModelKind::TpGmm: return "tpgmm";
    case ModelKind::Kmp: return "kmp";
  }
  return "unknown";
}

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "lfekmp") return ModelKind::LfeKmp;
  if (s == "tpgmm") return ModelKind::TpGmm;
  if (s == "kmp") return ModelKind::Kmp;
  throw Error(ErrorKind::InvalidArgument, "unknown method '" + s + "' (expected kmp, tpgmm or lfekmp)");
}

ModelKind model_kind(const std::string& json_text) {
  const json j = parse(json_text);
  const std::string k = str(j, "kind", "");
  try {
    return model_kind_from_string(k);
  } catch (const Error&) {
    fail("kind", "unknown model kind '" + k + "'");
  }
}

std::string to_json(const LfeKmpModel& model) {
  json j = header(ModelKind::LfeKmp);
  j["dim"] = model.dim;
  j["config"] = config_json(model.config);
  j["demo_frames"] = demo_frames_json(model.demo_frames);
  json frames = json::array();
  for (const auto& f : model.frames) {
    frames.push_back({{"gmm", gmm_json(f.gmm)},
                      {"reference", reference_json(f.reference)},
                      {"extended", reference_json(f.extended)},
                      {"kernel", kernel_json(f.kernel)},
                      {"tangent_base", quat_json(f.tangent_base)}});
  }
  j["frames"] = frames;
  return dump(j);
}

LfeKmpModel lfekmp_model_from_json(const std::string& json_text) {
  const json j = parse(json_text);
  check_header(j, ModelKind::LfeKmp);
  LfeKmpModel m;
  m.dim = integer(j, "dim", "");
  if (m.dim != 2 && m.dim != 3) fail("dim", "must be 2 or 3");
  m.config = read_config(field(j, "config", ""), "config");
  m.demo_frames = read_demo_frames(field(j, "demo_frames", ""), "demo_frames");
  const json& frames = array(j, "frames", "");
  if (frames.empty()) fail("frames", "no frame models");
  for (std::size_t p = 0; p < frames.size(); ++p) {
    const std::string path = at("frames", p);
    const json& f = frames[p];
    GmmModel gmm = read_gmm(field(f, "gmm", path), path + ".gmm");
    ReferenceTrajectory ref = read_reference(field(f, "reference", path), path + ".reference");
    ReferenceTrajectory ext = read_reference(field(f, "extended", path), path + ".extended");
    if (ext.output_dim() != m.output_dim()) fail(path + ".extended", "output dimension does not match dim");
    const KernelParams kernel = read_kernel(field(f, "kernel", path), path + ".kernel");
    const UnitQuaternion base = read_quat(field(f, "tangent_base", path), path + ".tangent_base");
    m.frames.push_back(make_frame_model(std::move(gmm), std::move(ref), std::move(ext), kernel, base, m.config));
  }
  return m;
}

std::string to_json(const TpGmmModel& model) {
  json j = header(ModelKind::TpGmm);
  j["num_components"] = model.num_components;
  j["dim"] = model.dim;
  j["seed"] = model.seed;
  j["t_min"] = model.t_min;
  j["t_max"] = model.t_max;
  j["priors"] = model.priors;
  j["log_likelihood"] = model.log_likelihood;
  json frames = json::array();
  for (std::size_t p = 0; p < model.num_frames(); ++p) {
    json means = json::array();
    json covs = json::array();
    for (const auto& v : model.means[p]) means.push_back(vec_json(v));
    for (const auto& c : model.covs[p]) covs.push_back(mat_json(c));
    frames.push_back({{"means", means}, {"covs", covs}});
  }
  j["frames"] = frames;
  return dump(j);
}

TpGmmModel tpgmm_model_from_json(const std::string& json_text) {
  const json j = parse(json_text);
  check_header(j, ModelKind::TpGmm);
  TpGmmModel m;
  m.num_components = integer(j, "num_components", "");
  m.dim = integer(j, "dim", "");
  m.seed = u64(j, "seed", "");
  m.t_min = num(j, "t_min", "");
  m.t_max = num(j, "t_max", "");
  m.priors = read_doubles(field(j, "priors", ""), "priors");
  m.log_likelihood = read_doubles(field(j, "log_likelihood", ""), "log_likelihood");
  if (m.dim != 2 && m.dim != 3) fail("dim", "must be 2 or 3");
  if (m.num_components < 1 || m.priors.size() != static_cast<std::size_t>(m.num_components)) {
    fail("priors", "length must equal num_components");
  }
  const json& frames = array(j, "frames", "");
  if (frames.empty()) fail("frames", "no frames");
  const Eigen::Index jd = m.dim + 1;
  for (std::size_t p = 0; p < frames.size(); ++p) {
    const std::string path = at("frames", p);
    const json& means = array(frames[p], "means", path);
    const json& covs = array(frames[p], "covs", path);
    if (means.size() != m.priors.size() || covs.size() != m.priors.size()) fail(path, "component count mismatch");
    m.means.emplace_back();
    m.covs.emplace_back();
    for (std::size_t k = 0; k < means.size(); ++k) {
      m.means.back().push_back(read_vec(means[k], at(path + ".means", k), jd));
      m.covs.back().push_back(read_mat(covs[k], at(path + ".covs", k), jd, jd));
    }
  }
  return m;
}

std::string to_json(const KmpBaselineModel& model) {
  json j = header(ModelKind::Kmp);
  j["dim"] = model.dim;
  j["config"] = config_json(model.config);
  j["gmm"] = gmm_json(model.gmm);
  j["reference"] = reference_json(model.reference);
  j["kernel"] = kernel_json(model.kernel);
  j["tangent_base"] = quat_json(model.tangent_base);
  return dump(j);
}

KmpBaselineModel kmp_model_from_json(const std::string& json_text) {
  const json j = parse(json_text);
  check_header(j, ModelKind::Kmp);
  KmpBaselineModel m;
  m.dim = integer(j, "dim", "");
  if (m.dim != 2 && m.dim != 3) fail("dim", "must be 2 or 3");
  m.config = read_config(field(j, "config", ""), "config");
  m.gmm = read_gmm(field(j, "gmm", ""), "gmm");
  m.reference = read_reference(field(j, "reference", ""), "reference");
  m.kernel = read_kernel(field(j, "kernel", ""), "kernel");
  m.tangent_base = read_quat(field(j, "tangent_base", ""), "tangent_base");
  return m;
}

std::string gmm_to_json(const GmmModel& model) { return dump(gmm_json(model)); }

GmmModel gmm_from_json(const std::string& json_text) { return read_gmm(parse(json_text), ""); }

std::string task_parameters_to_json(const TaskParameters& frames) { return dump(json{{"frames", params_json(frames)}}); }

TaskParameters task_parameters_from_json(const std::string& json_text) {
  const json j = parse(json_text);
  if (j.is_array()) return read_params(j, "frames");
  return read_params(field(j, "frames", ""), "frames");
}

std::string bundle_to_json(const DemoBundle& bundle) {
  json demos = json::array();
  for (std::size_t n = 0; n < bundle.demos.size(); ++n) {
    const auto& d = bundle.demos[n];
    json poses = json::array();
    for (const auto& p : d.poses) poses.push_back(pose_json(p));
    demos.push_back({{"id", n < bundle.demo_ids.size() ? bundle.demo_ids[n] : std::to_string(n)},
                     {"times", d.times},
                     {"poses", poses},
                     {"frames", params_json(bundle.demo_frames.at(n))}});
  }
  return dump(json{{"format_version", kModelFormatVersion},
                   {"source", bundle.source},
                   {"demos", demos},
                   {"final_frames", final_frames_json(bundle.final_frames)}});
}

DemoBundle bundle_from_json(const std::string& json_text) {
  const json j = parse(json_text);
  const int version = integer(j, "format_version", "");
  if (version != kModelFormatVersion) fail("format_version", "unsupported version " + std::to_string(version));
  DemoBundle b;
  b.source = j.contains("source") ? str(j, "source", "") : std::string();
  const json& demos = array(j, "demos", "");
  for (std::size_t n = 0; n < demos.size(); ++n) {
    const std::string path = at("demos", n);
    PoseTrajectory d;
    d.times = read_doubles(field(demos[n], "times", path), path + ".times");
    const json& poses = array(demos[n], "poses", path);
    if (poses.size() != d.times.size()) fail(path, "times and poses differ in length");
    for (std::size_t i = 0; i < poses.size(); ++i) d.poses.push_back(read_pose(poses[i], at(path + ".poses", i)));
    b.demo_ids.push_back(demos[n].contains("id") ? str(demos[n], "id", path) : std::to_string(n));
    b.demos.push_back(std::move(d));
    b.demo_frames.push_back(read_params(field(demos[n], "frames", path), path + ".frames"));
  }
  if (j.contains("final_frames")) b.final_frames = read_final_frames(j["final_frames"], "final_frames", std::nullopt);
  try {
    b.validate();
  } catch (const Error& e) {
    fail("demos", e.what());
  }
  return b;
}

KeypointFrameSequence keypoint_sequence_from_json(const std::string& json_text) {
  const json j = parse(json_text);
  const auto cam = read_camera(j);
  KeypointFrameSequence seq;
  const json& frames = array(j, "frames", "");
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const std::string path = at("frames", i);
    KeypointFrame f;
    f.t = num(frames[i], "t", path);
    const json& objects = array(frames[i], "objects", path);
    bool has_slave = false;
    for (std::size_t o = 0; o < objects.size(); ++o) {
      KeypointSet s = read_keypoints(objects[o], at(path + ".objects", o), cam);
      if (s.role == ObjectRole::Slave) {
        if (has_slave) fail(path, "more than one slave object");
        f.slave = std::move(s);
        has_slave = true;
      } else {
        if (f.master) fail(path, "more than one master object");
        f.master = std::move(s);
      }
    }
    if (!has_slave) fail(path, "no slave object");
    seq.frames.push_back(std::move(f));
  }
  try {
    seq.validate();
  } catch (const Error& e) {
    fail("frames", e.what());
  }
  return seq;
}

std::string keypoint_sequence_to_json(const KeypointFrameSequence& seq) {
  json frames = json::array();
  for (const auto& f : seq.frames) {
    json objects = json::array({keypoints_json(f.slave)});
    if (f.master) objects.push_back(keypoints_json(*f.master));
    frames.push_back({{"t", f.t}, {"objects", objects}});
  }
  return dump(json{{"frames", frames}});
}

std::string keypoint_set_to_json(const KeypointSet& set) { return dump(keypoints_json(set)); }

Scenario scenario_from_json(const std::string& json_text) {
  const json j = parse(json_text);
  const auto cam = read_camera(j);
  Scenario s;
  s.master = read_keypoints(field(j, "master", ""), "master", cam);
  if (s.master.role != ObjectRole::Master) fail("master.role", "expected 'master'");
  s.start = read_pose(field(j, "start_pose", ""), "start_pose");
  if (s.start.dim() != 3) fail("start_pose.position", "expected 3 entries");
  if (j.contains("stats")) s.stats = read_stats(j["stats"], "stats");
  if (j.contains("final_frames")) s.final_frames = read_final_frames(j["final_frames"], "final_frames", cam);
  if (!s.stats && s.final_frames.empty()) fail("", "scenario needs 'stats' or 'final_frames'");
  return s;
}

std::string scenario_to_json(const Scenario& scenario) {
  json j{{"master", keypoints_json(scenario.master)}, {"start_pose", pose_json(scenario.start)}};
  if (scenario.stats) j["stats"] = stats_json(*scenario.stats);
  if (!scenario.final_frames.empty()) j["final_frames"] = final_frames_json(scenario.final_frames);
  return dump(j);
}

std::string stats_to_json(const InteractionStats& stats) { return dump(stats_json(stats)); }

InteractionStats stats_from_json(const std::string& json_text) { return read_stats(parse(json_text), "stats"); }

std::string endpose_to_json(const EndposeResult& r) {
  return dump(json{{"target", pose_json(r.target)},
                   {"interaction_target", vec_json(r.interaction_target)},
                   {"z_slave", vec_json(r.z_slave)},
                   {"num_candidates", r.num_candidates},
                   {"chosen", r.chosen},
                   {"distance", r.distance}});
}

EndposeResult endpose_from_json(const std::string& json_text) {
  const json j = parse(json_text);
  EndposeResult r;
  r.target = read_pose(field(j, "target", ""), "target");
  r.interaction_target = read_vec3(field(j, "interaction_target", ""), "interaction_target");
  r.z_slave = read_vec3(field(j, "z_slave", ""), "z_slave");
  r.num_candidates = u64(j, "num_candidates", "");
  r.chosen = u64(j, "chosen", "");
  r.distance = num(j, "distance", "");
  return r;
}

std::string trajectory_to_json(const GeneralizedTrajectory& traj) {
  json positions = json::array();
  json orientations = json::array();
  json covs = json::array();
  json ocovs = json::array();
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    positions.push_back(vec_json(traj.executed.poses[i].position));
    covs.push_back(mat_json(traj.position[i].cov()));
    if (traj.executed.dim() == 3) orientations.push_back(quat_json(traj.executed.poses[i].orientation));
    if (i < traj.orientation_cov.size()) ocovs.push_back(mat_json(traj.orientation_cov[i]));
  }
  json j{{"times", traj.times}, {"positions", positions}, {"position_covs", covs}};
  if (traj.executed.dim() == 3) {
    j["orientations"] = orientations;
    j["orientation_covs"] = ocovs;
  }
  return dump(j);
}

PoseTrajectory pose_trajectory_from_json(const std::string& json_text) {
  const json j = parse(json_text);
  PoseTrajectory t;
  t.times = read_doubles(field(j, "times", ""), "times");
  const json& positions = array(j, "positions", "");
  if (positions.size() != t.times.size()) fail("positions", "length differs from times");
  const bool has_q = j.contains("orientations");
  if (has_q && array(j, "orientations", "").size() != t.times.size()) fail("orientations", "length differs from times");
  for (std::size_t i = 0; i < positions.size(); ++i) {
    Pose p(read_vec(positions[i], at("positions", i)));
    if (has_q) p.orientation = read_quat(j["orientations"][i], at("orientations", i));
    t.poses.push_back(std::move(p));
  }
  return t;
}

std::string metrics_to_json(const MetricReport& report) {
  return dump(json{{"c_s", report.c_s},
                   {"kappa_s", report.kappa_s},
                   {"endpoint_error", report.endpoint_error},
                   {"n_points", report.n_points}});
}

}  // namespace vlmp
