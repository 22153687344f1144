#include "vlmp/tpgmm.hpp"

#include "em_core.hpp"
#include "vlmp/error.hpp"

namespace vlmp {
namespace {

// Frame acting on joint (t, x): time passes through unchanged.
std::pair<Mat, Vec> joint_frame(const TaskFrame& f) {
  const int d = f.dim();
  Mat a = Mat::Identity(d + 1, d + 1);
  a.block(1, 1, d, d) = f.A;
  Vec b = Vec::Zero(d + 1);
  b.tail(d) = f.b;
  return {a, b};
}

}  // namespace

TpGmmModel tpgmm_learn(const std::vector<PoseTrajectory>& demos, const std::vector<TaskParameters>& demo_frames,
                       const TpGmmOptions& options) {
  const auto local = encode_local(demos, demo_frames);
  const int dim = demos.front().dim();
  Eigen::Index cols = 0;
  for (const auto& d : demos) cols += static_cast<Eigen::Index>(d.size());

  std::vector<Mat> frames;
  for (const auto& per_frame : local) {
    Mat data(dim + 1, cols);
    Eigen::Index c = 0;
    for (const auto& demo : per_frame) {
      for (std::size_t i = 0; i < demo.size(); ++i, ++c) {
        data(0, c) = demo.times[i];
        data.block(1, c, dim, 1) = demo.poses[i].position;
      }
    }
    frames.push_back(std::move(data));
  }

  detail::EmOptions em{options.num_components, options.seed, options.max_iter, options.tol, options.cov_floor};
  detail::EmResult r = detail::run_em(frames, em);

  TpGmmModel model;
  model.num_components = options.num_components;
  model.dim = dim;
  model.seed = options.seed;
  model.priors = std::move(r.priors);
  model.means = std::move(r.means);
  model.covs = std::move(r.covs);
  model.log_likelihood = std::move(r.log_likelihood);
  model.t_min = frames.front().row(0).minCoeff();
  model.t_max = frames.front().row(0).maxCoeff();
  return model;
}

GmmModel tpgmm_fuse_components(const TpGmmModel& model, const TaskParameters& new_frames) {
  new_frames.validate();
  if (new_frames.size() != model.num_frames()) {
    throw Error(ErrorKind::DimensionMismatch, "tpgmm_generalize: frame count differs from the model");
  }
  if (new_frames.dim() != model.dim) {
    throw Error(ErrorKind::DimensionMismatch, "tpgmm_generalize: frame dimension differs from the model");
  }
  std::vector<std::pair<Mat, Vec>> maps;
  for (const auto& f : new_frames.frames) maps.push_back(joint_frame(f));

  GmmModel fused;
  fused.priors = model.priors;
  fused.seed = model.seed;
  fused.t_min = model.t_min;
  fused.t_max = model.t_max;
  std::vector<GaussianState> projected(model.num_frames());
  for (int k = 0; k < model.num_components; ++k) {
    for (std::size_t p = 0; p < model.num_frames(); ++p) {
      projected[p] = gaussian_affine(maps[p].first, maps[p].second,
                                     GaussianState(model.means[p][static_cast<std::size_t>(k)],
                                                   model.covs[p][static_cast<std::size_t>(k)]));
    }
    const GaussianState prod = gaussian_product(projected);
    fused.means.push_back(prod.mean());
    fused.covs.push_back(prod.cov());
  }
  return fused;
}

GeneralizedTrajectory tpgmm_generalize(const TpGmmModel& model, const TaskParameters& new_frames,
                                       const std::vector<double>& times) {
  const GmmModel fused = tpgmm_fuse_components(model, new_frames);
  const ReferenceTrajectory ref = gmr_regress(fused, times);
  GeneralizedTrajectory out;
  out.times = times;
  out.executed.times = times;
  const UnitQuaternion q = new_frames.frames.front().rotation();
  for (const auto& s : ref.states) {
    out.position.push_back(s);
    out.executed.poses.emplace_back(s.mean(), q);
    if (model.dim == 3) out.orientation_cov.push_back(Mat3::Zero());
  }
  return out;
}

}  // namespace vlmp
