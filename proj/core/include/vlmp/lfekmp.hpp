#pragma once

// Task-parameterized KMP with local start/end feature enhancement.
//
// Demonstrations are encoded in every task frame, a GMM/GMR reference is
// regressed per frame, the reference is extended with near-deterministic
// desired points around the endpoint anchored by that frame, and one KMP is
// fitted per frame. Generalization maps each frame's prediction through the
// new task frames and fuses them with a product of Gaussians (positions) and
// a tangent-space product on S^3 (orientations).

#include <span>
#include <vector>

#include "vlmp/gmm.hpp"
#include "vlmp/kmp.hpp"

namespace vlmp {

struct TaskParameters {
  std::vector<TaskFrame> frames;

  std::size_t size() const { return frames.size(); }
  int dim() const { return frames.empty() ? 0 : frames.front().dim(); }
  void validate() const;
};

/// Task parameters of a trajectory: frame 1 at its start pose, frame 2 at its
/// end pose.
TaskParameters endpoint_frames(const PoseTrajectory& traj);

enum class AnchorSide { Start, End };

struct EndpointAnchor {
  AnchorSide side = AnchorSide::Start;
  Vec mean;
};

struct LfeKmpConfig {
  int num_components = 5;
  std::uint64_t seed = 0;
  int em_max_iter = 300;
  double cov_floor = 1e-8;
  /// Floor used instead of cov_floor when learning from a single demo.
  double one_shot_cov_floor = 1e-4;
  std::size_t n_reference = 100;

  bool tune_kernel = true;
  /// Kernel variances (fixed and grid) are multiples of the reference's
  /// spread variance, so the fit does not depend on data units.
  KernelParams kernel{0.05, 0.04};
  KernelGrid kernel_grid{{0.02, 0.03, 0.05, 0.08, 0.12, 0.2}, {0.04}};
  double lambda_mean = 1.0;
  double lambda_cov = 60.0;

  double epsilon = 1e-8;
  int resample_count = 5;  // R; 0 disables enhancement
  double window = 0.1;     // fraction of normalized time
  bool anchors_in_all_frames = false;
  int orientation_iterations = 1;

  void validate() const;
};

/// Demo sets expressed in each frame: result[p][n] is demo n in frame p.
/// Per-dimension variance of the reference means over time: the unit for
/// kernel variances.
double reference_spread_variance(const ReferenceTrajectory& ref);

std::vector<std::vector<PoseTrajectory>> encode_local(const std::vector<PoseTrajectory>& demos,
                                                      const std::vector<TaskParameters>& demo_frames);

/// Inserts desired points with covariance epsilon * I around each anchored
/// endpoint at R timestamps evenly spaced over the window, the endpoint
/// included. The endpoint takes the anchor mean; point j takes the reference
/// mean plus (1 - j/R) times the anchor's offset from the reference endpoint.
/// Points at equal times collapse to the one with smaller covariance.
ReferenceTrajectory enhance_local_features(const ReferenceTrajectory& ref,
                                           std::span<const EndpointAnchor> anchors, int resample_count,
                                           double window, double epsilon);

struct LfeFrameModel {
  GmmModel gmm;
  ReferenceTrajectory reference;  // GMR output before enhancement
  ReferenceTrajectory extended;   // reference with desired points merged in
  KernelParams kernel;
  UnitQuaternion tangent_base;    // 3D only: base of the orientation tangent space
  KmpModel kmp;
};

struct LfeKmpModel {
  LfeKmpConfig config;
  int dim = 0;  // position dimension
  std::vector<TaskParameters> demo_frames;
  std::vector<LfeFrameModel> frames;

  int output_dim() const { return dim == 3 ? 6 : dim; }
};

struct GeneralizedTrajectory {
  std::vector<double> times;
  /// Fused position distribution per time.
  std::vector<GaussianState> position;
  /// Fused orientation covariance per time, tangent at the executed orientation (3D only).
  std::vector<Mat3> orientation_cov;
  PoseTrajectory executed;
};

LfeKmpModel lfekmp_learn(const std::vector<PoseTrajectory>& demos, const std::vector<TaskParameters>& demo_frames,
                         const LfeKmpConfig& config);

/// Rebuilds the KMP part of a frame model from its stored extended reference.
LfeFrameModel make_frame_model(GmmModel gmm, ReferenceTrajectory reference, ReferenceTrajectory extended,
                               KernelParams kernel, UnitQuaternion base, const LfeKmpConfig& config);

GeneralizedTrajectory lfekmp_generalize(const LfeKmpModel& model, const TaskParameters& new_frames,
                                        const std::vector<double>& times);

/// Per-frame global predictions fused across frames (shared with baselines).
struct FramePrediction {
  std::vector<GaussianState> position;        // one per time
  std::vector<UnitQuaternion> orientation;    // 3D only
  std::vector<Mat3> orientation_cov;          // tangent at `orientation`
};

GeneralizedTrajectory fuse_predictions(const std::vector<double>& times, std::span<const FramePrediction> frames,
                                       int dim, int orientation_iterations);

/// Classical (non task-parameterized) KMP: learned in global coordinates and
/// adapted to new start/end poses with one via-point per endpoint.
struct KmpBaselineModel {
  LfeKmpConfig config;
  int dim = 0;
  GmmModel gmm;
  ReferenceTrajectory reference;
  KernelParams kernel;
  UnitQuaternion tangent_base;
};

KmpBaselineModel kmp_baseline_learn(const std::vector<PoseTrajectory>& demos, const LfeKmpConfig& config);

/// Via-points come from the first and last frame origins.
GeneralizedTrajectory kmp_baseline_generalize(const KmpBaselineModel& model, const TaskParameters& new_frames,
                                              const std::vector<double>& times);

/// Time-normalizes a trajectory onto [0, 1] (first/last map exactly).
PoseTrajectory normalize_time(const PoseTrajectory& traj);

}  // namespace vlmp
