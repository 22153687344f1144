#include "vlmp/lfekmp.hpp"

#include <algorithm>
#include <cmath>

#include "vlmp/error.hpp"

namespace vlmp {
namespace {

constexpr int kTangentDim = 3;

// Reference mean at time t by linear interpolation (exact at grid times).
Vec interpolate_mean(const ReferenceTrajectory& ref, double t) {
  const auto& ts = ref.times;
  if (t <= ts.front()) return ref.states.front().mean();
  if (t >= ts.back()) return ref.states.back().mean();
  const auto it = std::lower_bound(ts.begin(), ts.end(), t);
  const auto hi = static_cast<std::size_t>(it - ts.begin());
  if (ts[hi] == t) return ref.states[hi].mean();
  const std::size_t lo = hi - 1;
  const double a = (t - ts[lo]) / (ts[hi] - ts[lo]);
  return (1.0 - a) * ref.states[lo].mean() + a * ref.states[hi].mean();
}

// Joint data matrix [t; position; tangent orientation] over all demos.
Mat stack_demo_data(const std::vector<PoseTrajectory>& demos, int dim, const UnitQuaternion& base) {
  const int rows = 1 + dim + (dim == 3 ? kTangentDim : 0);
  Eigen::Index cols = 0;
  for (const auto& d : demos) cols += static_cast<Eigen::Index>(d.size());
  Mat data(rows, cols);
  Eigen::Index c = 0;
  for (const auto& demo : demos) {
    for (std::size_t i = 0; i < demo.size(); ++i, ++c) {
      data(0, c) = demo.times[i];
      data.block(1, c, dim, 1) = demo.poses[i].position;
      if (dim == 3) data.block(1 + dim, c, kTangentDim, 1) = quat_log(base, demo.poses[i].orientation);
    }
  }
  return data;
}

UnitQuaternion orientation_mean(const std::vector<PoseTrajectory>& demos) {
  std::vector<UnitQuaternion> qs;
  for (const auto& d : demos) {
    for (const auto& p : d.poses) qs.push_back(p.orientation);
  }
  return quat_mean(qs);
}

// Anchor mean (local position plus tangent orientation) for the pose `pose`.
Vec anchor_vector(const Pose& pose, const UnitQuaternion& base) {
  const int dim = pose.dim();
  Vec v(dim == 3 ? dim + kTangentDim : dim);
  v.head(dim) = pose.position;
  if (dim == 3) v.tail(kTangentDim) = quat_log(base, pose.orientation);
  return v;
}

void validate_demos(const std::vector<PoseTrajectory>& demos) {
  if (demos.empty()) throw Error(ErrorKind::InvalidArgument, "no demonstrations");
  const int dim = demos.front().dim();
  if (dim != 2 && dim != 3) throw Error(ErrorKind::DimensionMismatch, "demonstrations must be 2D or 3D");
  for (const auto& d : demos) {
    if (d.size() < 2 || d.times.size() != d.size()) {
      throw Error(ErrorKind::InvalidArgument, "each demonstration needs at least two timed samples");
    }
    if (d.dim() != dim) throw Error(ErrorKind::DimensionMismatch, "demonstrations differ in dimension");
  }
}

GmmFitOptions gmm_options(const LfeKmpConfig& config, std::size_t num_demos) {
  GmmFitOptions o;
  o.num_components = config.num_components;
  o.seed = config.seed;
  o.max_iter = config.em_max_iter;
  o.cov_floor = num_demos == 1 ? std::max(config.cov_floor, config.one_shot_cov_floor) : config.cov_floor;
  return o;
}

KernelParams choose_kernel(const ReferenceTrajectory& ref, const LfeKmpConfig& config) {
  const double scale = reference_spread_variance(ref);
  if (!config.tune_kernel) return {config.kernel.lengthscale, config.kernel.variance * scale};
  KernelGrid grid = config.kernel_grid;
  for (double& v : grid.variances) v *= scale;
  return kmp_tune(ref, grid, config.lambda_mean, config.lambda_cov).best;
}

// Predicted local Gaussian mapped into the global frame.
void push_global(const GaussianState& local, const TaskFrame& frame, const UnitQuaternion& local_base, int dim,
                 FramePrediction& out) {
  out.position.push_back(gaussian_affine(frame, local.marginal(0, dim)));
  if (dim != 3) return;
  const GaussianState rot = local.marginal(dim, kTangentDim);
  const UnitQuaternion frame_q = frame.rotation();
  const UnitQuaternion global_base = frame_q * local_base;
  const UnitQuaternion mean_q = quat_exp(global_base, rot.mean());
  out.orientation.push_back(mean_q);
  out.orientation_cov.push_back(parallel_transport(global_base, mean_q, Mat3(rot.cov())));
}

}  // namespace

void TaskParameters::validate() const {
  if (frames.empty()) throw Error(ErrorKind::InvalidArgument, "task parameters need at least one frame");
  const int d = frames.front().dim();
  for (const auto& f : frames) {
    if (f.dim() != d || f.A.rows() != d || f.A.cols() != d) {
      throw Error(ErrorKind::DimensionMismatch, "task frames differ in dimension");
    }
  }
}

TaskParameters endpoint_frames(const PoseTrajectory& traj) {
  if (traj.empty()) throw Error(ErrorKind::InvalidArgument, "endpoint_frames: empty trajectory");
  return {{TaskFrame::from_pose(traj.poses.front()), TaskFrame::from_pose(traj.poses.back())}};
}

void LfeKmpConfig::validate() const {
  auto fail = [](const char* msg) { throw Error(ErrorKind::Config, msg); };
  if (num_components < 1) fail("num_components must be >= 1");
  if (n_reference < 2) fail("n_reference must be >= 2");
  if (!(lambda_mean > 0.0) || !(lambda_cov > 0.0)) fail("lambda_mean and lambda_cov must be > 0");
  if (!(epsilon > 0.0)) fail("epsilon must be > 0");
  if (resample_count < 0) fail("R must be >= 0");
  if (!(window > 0.0) || window > 0.2) fail("window must be in (0, 0.2]");
  if (orientation_iterations < 1) fail("orientation_iterations must be >= 1");
  if (!(cov_floor > 0.0)) fail("cov_floor must be > 0");
  if (tune_kernel && (kernel_grid.lengthscales.empty() || kernel_grid.variances.empty())) {
    fail("kernel grid must be non-empty");
  }
  for (double l : kernel_grid.lengthscales) {
    if (!(l > 0.0)) fail("kernel lengthscales must be > 0");
  }
  for (double v : kernel_grid.variances) {
    if (!(v > 0.0)) fail("kernel variances must be > 0");
  }
  if (!(kernel.lengthscale > 0.0) || !(kernel.variance > 0.0)) fail("kernel parameters must be > 0");
}

PoseTrajectory normalize_time(const PoseTrajectory& traj) {
  if (traj.size() < 2) throw Error(ErrorKind::InvalidArgument, "normalize_time: need at least two samples");
  const double t0 = traj.times.front();
  const double span = traj.times.back() - t0;
  if (!(span > 0.0)) throw Error(ErrorKind::InvalidArgument, "normalize_time: timestamps must increase");
  PoseTrajectory out = traj;
  for (auto& t : out.times) t = (t - t0) / span;
  out.times.front() = 0.0;
  out.times.back() = 1.0;
  return out;
}

double reference_spread_variance(const ReferenceTrajectory& ref) {
  if (ref.size() == 0) return 1.0;
  const int o = ref.output_dim();
  const double n = static_cast<double>(ref.size());
  Vec mean = Vec::Zero(o);
  for (const auto& st : ref.states) mean += st.mean();
  mean /= n;
  double spread = 0.0;
  double noise = 0.0;
  for (const auto& st : ref.states) {
    spread += (st.mean() - mean).squaredNorm();
    noise += st.cov().trace();
  }
  spread /= n * o;
  noise /= n * o;
  // A constant reference has no extent; fall back to its noise, then to 1.
  if (spread > 0.0 && std::isfinite(spread)) return spread;
  return noise > 0.0 && std::isfinite(noise) ? noise : 1.0;
}

std::vector<std::vector<PoseTrajectory>> encode_local(const std::vector<PoseTrajectory>& demos,
                                                      const std::vector<TaskParameters>& demo_frames) {
  validate_demos(demos);
  if (demo_frames.size() != demos.size()) {
    throw Error(ErrorKind::DimensionMismatch, "encode_local: need one set of task parameters per demo");
  }
  const std::size_t num_frames = demo_frames.front().size();
  for (const auto& tp : demo_frames) {
    tp.validate();
    if (tp.size() != num_frames || tp.dim() != demos.front().dim()) {
      throw Error(ErrorKind::DimensionMismatch, "encode_local: inconsistent task parameters");
    }
  }
  std::vector<std::vector<PoseTrajectory>> out(num_frames);
  for (std::size_t p = 0; p < num_frames; ++p) {
    for (std::size_t n = 0; n < demos.size(); ++n) {
      out[p].push_back(frame_apply(frame_invert(demo_frames[n].frames[p]), demos[n]));
    }
  }
  return out;
}

ReferenceTrajectory enhance_local_features(const ReferenceTrajectory& ref,
                                           std::span<const EndpointAnchor> anchors, int resample_count,
                                           double window, double epsilon) {
  ref.validate();
  if (ref.size() < 1) throw Error(ErrorKind::InvalidArgument, "enhance_local_features: empty reference");
  if (resample_count < 1) throw Error(ErrorKind::InvalidArgument, "enhance_local_features: R must be >= 1");
  if (!(window > 0.0) || window > 0.2) {
    throw Error(ErrorKind::InvalidArgument, "enhance_local_features: window must be in (0, 0.2]");
  }
  if (!(epsilon > 0.0)) throw Error(ErrorKind::InvalidArgument, "enhance_local_features: epsilon must be > 0");
  const int out_dim = ref.output_dim();
  const double t_first = ref.times.front();
  const double t_last = ref.times.back();
  const double span = t_last - t_first;
  const Mat eps_cov = epsilon * Mat::Identity(out_dim, out_dim);

  struct Point {
    double t;
    GaussianState state;
  };
  std::vector<Point> points;
  points.reserve(ref.size() + anchors.size() * static_cast<std::size_t>(resample_count));
  for (std::size_t i = 0; i < ref.size(); ++i) points.push_back({ref.times[i], ref.states[i]});

  for (const auto& anchor : anchors) {
    if (anchor.mean.size() != out_dim) {
      throw Error(ErrorKind::DimensionMismatch, "enhance_local_features: anchor dimension differs from reference");
    }
    const bool start = anchor.side == AnchorSide::Start;
    const double t_end = start ? t_first : t_last;
    const double step = window * span / static_cast<double>(resample_count);
    // A window narrower than the time resolution degenerates to the endpoint.
    const int count = step > 1e-12 * std::max(span, 1.0) ? resample_count : 1;
    // Window points follow the reference shape, pulled towards the anchor by
    // a weight that decays linearly across the window.
    const Vec offset = anchor.mean - interpolate_mean(ref, t_end);
    for (int j = 0; j < count; ++j) {
      const double t = start ? t_first + step * j : t_last - step * j;
      const double taper = 1.0 - static_cast<double>(j) / resample_count;
      const Vec mean = j == 0 ? anchor.mean : Vec(interpolate_mean(ref, t) + taper * offset);
      points.push_back({j == 0 ? t_end : t, GaussianState(mean, eps_cov)});
    }
  }

  std::stable_sort(points.begin(), points.end(), [](const Point& a, const Point& b) { return a.t < b.t; });
  ReferenceTrajectory out;
  for (auto& p : points) {
    if (!out.times.empty() && out.times.back() == p.t) {
      if (p.state.cov().trace() < out.states.back().cov().trace()) out.states.back() = std::move(p.state);
      continue;
    }
    out.times.push_back(p.t);
    out.states.push_back(std::move(p.state));
  }
  out.extrapolated.assign(out.times.size(), false);
  return out;
}

LfeFrameModel make_frame_model(GmmModel gmm, ReferenceTrajectory reference, ReferenceTrajectory extended,
                               KernelParams kernel, UnitQuaternion base, const LfeKmpConfig& config) {
  KmpModel kmp = kmp_fit(extended, kernel, config.lambda_mean, config.lambda_cov);
  return LfeFrameModel{std::move(gmm), std::move(reference), std::move(extended), kernel, base, std::move(kmp)};
}

LfeKmpModel lfekmp_learn(const std::vector<PoseTrajectory>& demos, const std::vector<TaskParameters>& demo_frames,
                         const LfeKmpConfig& config) {
  config.validate();
  const auto local = encode_local(demos, demo_frames);
  const int dim = demos.front().dim();
  const std::size_t num_frames = local.size();

  LfeKmpModel model;
  model.config = config;
  model.dim = dim;
  model.demo_frames = demo_frames;
  const std::vector<double> grid = linspace(0.0, 1.0, config.n_reference);

  for (std::size_t p = 0; p < num_frames; ++p) {
    const UnitQuaternion base = dim == 3 ? orientation_mean(local[p]) : UnitQuaternion{};
    const Mat data = stack_demo_data(local[p], dim, base);
    GmmFit fit = gmm_fit(data, gmm_options(config, demos.size()));
    ReferenceTrajectory reference = gmr_regress(fit.model, grid);
    const KernelParams kernel = choose_kernel(reference, config);

    // Anchor q of frame p: origin of frame q seen from frame p, averaged over
    // demos. For q == p that is exactly the local origin.
    std::vector<EndpointAnchor> anchors;
    auto anchor_for = [&](std::size_t q, AnchorSide side) {
      Vec mean = Vec::Zero(dim == 3 ? dim + kTangentDim : dim);
      if (q != p) {
        for (std::size_t n = 0; n < demos.size(); ++n) {
          const Pose o = frame_apply(frame_invert(demo_frames[n].frames[p]), demo_frames[n].frames[q].origin_pose());
          mean += anchor_vector(o, base);
        }
        mean /= static_cast<double>(demos.size());
      } else {
        mean = anchor_vector(Pose(Vec::Zero(dim)), base);
      }
      anchors.push_back({side, mean});
    };
    const std::size_t last = num_frames - 1;
    if (config.anchors_in_all_frames && num_frames >= 2) {
      anchor_for(0, AnchorSide::Start);
      anchor_for(last, AnchorSide::End);
    } else if (p == 0) {
      anchor_for(0, AnchorSide::Start);
    } else if (p == last) {
      anchor_for(last, AnchorSide::End);
    }

    ReferenceTrajectory extended =
        config.resample_count > 0 && !anchors.empty()
            ? enhance_local_features(reference, anchors, config.resample_count, config.window, config.epsilon)
            : reference;
    model.frames.push_back(
        make_frame_model(std::move(fit.model), std::move(reference), std::move(extended), kernel, base, config));
  }
  return model;
}

GeneralizedTrajectory fuse_predictions(const std::vector<double>& times, std::span<const FramePrediction> frames,
                                       int dim, int orientation_iterations) {
  if (frames.empty()) throw Error(ErrorKind::InvalidArgument, "fuse_predictions: no frames");
  GeneralizedTrajectory out;
  out.times = times;
  out.executed.times = times;
  std::vector<GaussianState> per_frame(frames.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    for (std::size_t p = 0; p < frames.size(); ++p) per_frame[p] = frames[p].position[i];
    GaussianState fused = gaussian_product(per_frame);
    Pose pose(fused.mean());

    if (dim == 3) {
      // Linearization point: precision-weighted, sign-aligned average.
      Eigen::Vector4d acc = Eigen::Vector4d::Zero();
      const Eigen::Vector4d ref = frames.front().orientation[i].coeffs_wxyz();
      for (const auto& f : frames) {
        Eigen::Vector4d c = f.orientation[i].coeffs_wxyz();
        if (c.dot(ref) < 0.0) c = -c;
        acc += c / std::max(f.orientation_cov[i].trace(), 1e-300);
      }
      UnitQuaternion lin(acc[0], acc[1], acc[2], acc[3]);
      Mat3 cov = Mat3::Identity();
      std::vector<GaussianState> tangent(frames.size());
      for (int it = 0; it < orientation_iterations; ++it) {
        for (std::size_t p = 0; p < frames.size(); ++p) {
          const UnitQuaternion& mp = frames[p].orientation[i];
          tangent[p] = GaussianState(quat_log(lin, mp), Mat(parallel_transport(mp, lin, frames[p].orientation_cov[i])));
        }
        const GaussianState prod = gaussian_product(tangent);
        const UnitQuaternion next = quat_exp(lin, prod.mean());
        cov = parallel_transport(lin, next, Mat3(prod.cov()));
        lin = next;
      }
      pose.orientation = lin;
      out.orientation_cov.push_back(cov);
    }
    out.position.push_back(std::move(fused));
    out.executed.poses.push_back(std::move(pose));
  }
  return out;
}

GeneralizedTrajectory lfekmp_generalize(const LfeKmpModel& model, const TaskParameters& new_frames,
                                        const std::vector<double>& times) {
  new_frames.validate();
  if (new_frames.size() != model.frames.size()) {
    throw Error(ErrorKind::DimensionMismatch, "lfekmp_generalize: frame count differs from the model");
  }
  if (new_frames.dim() != model.dim) {
    throw Error(ErrorKind::DimensionMismatch, "lfekmp_generalize: frame dimension differs from the model");
  }
  std::vector<FramePrediction> preds(model.frames.size());
  for (std::size_t p = 0; p < model.frames.size(); ++p) {
    const auto& fm = model.frames[p];
    for (double t : times) push_global(fm.kmp.predict(t), new_frames.frames[p], fm.tangent_base, model.dim, preds[p]);
  }
  return fuse_predictions(times, preds, model.dim, model.config.orientation_iterations);
}

KmpBaselineModel kmp_baseline_learn(const std::vector<PoseTrajectory>& demos, const LfeKmpConfig& config) {
  config.validate();
  validate_demos(demos);
  KmpBaselineModel model;
  model.config = config;
  model.dim = demos.front().dim();
  model.tangent_base = model.dim == 3 ? orientation_mean(demos) : UnitQuaternion{};
  const Mat data = stack_demo_data(demos, model.dim, model.tangent_base);
  model.gmm = gmm_fit(data, gmm_options(config, demos.size())).model;
  model.reference = gmr_regress(model.gmm, linspace(0.0, 1.0, config.n_reference));
  model.kernel = choose_kernel(model.reference, config);
  return model;
}

GeneralizedTrajectory kmp_baseline_generalize(const KmpBaselineModel& model, const TaskParameters& new_frames,
                                              const std::vector<double>& times) {
  new_frames.validate();
  if (new_frames.dim() != model.dim) {
    throw Error(ErrorKind::DimensionMismatch, "kmp_baseline_generalize: frame dimension differs from the model");
  }
  const EndpointAnchor via[] = {
      {AnchorSide::Start, anchor_vector(new_frames.frames.front().origin_pose(), model.tangent_base)},
      {AnchorSide::End, anchor_vector(new_frames.frames.back().origin_pose(), model.tangent_base)},
  };
  const ReferenceTrajectory adapted =
      enhance_local_features(model.reference, via, 1, model.config.window, model.config.epsilon);
  const KmpModel kmp = kmp_fit(adapted, model.kernel, model.config.lambda_mean, model.config.lambda_cov);
  FramePrediction pred;
  const TaskFrame global = TaskFrame::identity(model.dim);
  for (double t : times) push_global(kmp.predict(t), global, model.tangent_base, model.dim, pred);
  const FramePrediction preds[] = {pred};
  return fuse_predictions(times, preds, model.dim, model.config.orientation_iterations);
}

}  // namespace vlmp
