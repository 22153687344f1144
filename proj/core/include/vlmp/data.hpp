#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "vlmp/bridge.hpp"
#include "vlmp/lfekmp.hpp"

namespace vlmp {

struct KeypointFrame {
  double t = 0.0;
  KeypointSet slave;
  std::optional<KeypointSet> master;
};

struct KeypointFrameSequence {
  std::vector<KeypointFrame> frames;

  /// Strictly increasing timestamps, valid slave sets, consistent labels.
  void validate() const;
};

struct DemoBundle {
  std::vector<PoseTrajectory> demos;         // time-normalized to [0, 1]
  std::vector<std::string> demo_ids;
  std::vector<TaskParameters> demo_frames;   // one entry per demo
  std::vector<FinalFrame> final_frames;      // optional interaction states
  std::string source;

  int dim() const { return demos.empty() ? 0 : demos.front().dim(); }
  void validate() const;
};

struct ExtractedDemo {
  PoseTrajectory trajectory;  // raw timestamps
  KeypointSet final_slave;
  std::optional<KeypointSet> final_master;
};

/// Object pose per frame (see object_pose) plus the last frame's keypoints.
ExtractedDemo extract_demo_trajectory(const KeypointFrameSequence& seq);

/// Demo CSV with header `demo_id,t,x,y` (2D) or `demo_id,t,x,y,z,qw,qx,qy,qz`
/// (3D poses). Demos keep first-appearance order and are time-normalized.
/// 2D demos share identity-rotation frames at the mean start and mean end
/// point; 3D demos get frames at their own start and end poses.
DemoBundle load_demo_csv(const std::filesystem::path& path);
DemoBundle parse_demo_csv(const std::string& text, const std::string& origin = "<memory>");
void save_demo_csv(const DemoBundle& bundle, const std::filesystem::path& path);
std::string format_demo_csv(const DemoBundle& bundle);

/// Bundle from raw 2D/3D demos with frames at each demo's own endpoints.
DemoBundle make_bundle(std::vector<PoseTrajectory> demos, std::vector<FinalFrame> final_frames = {});

/// Frames at the mean start and mean end position (identity rotation).
TaskParameters mean_endpoint_frames(const std::vector<PoseTrajectory>& demos);

/// Largest pairwise distance between demo positions.
double workspace_diameter(const std::vector<PoseTrajectory>& demos);

/// Seeded rigid perturbation of every frame: the origin moves by at most
/// translation_scale * diameter and the frame rotates about its origin by at
/// most rotation_scale radians (about z in 2D, a random axis in 3D).
TaskParameters perturb_task(const TaskParameters& frames, std::uint64_t seed, double translation_scale,
                            double rotation_scale, double diameter);

namespace synth {

/// G-shaped handwriting demos (2D), ending near the origin.
std::vector<PoseTrajectory> gshape_demos(std::size_t count, std::uint64_t seed, std::size_t points = 200);

struct MugGeometry {
  double height = 0.10;
  double radius = 0.04;
  double handle = 0.065;  // distance of K_b from the axis
};

/// Keypoints of a mug at `pose` (origin at the base centre, z up the axis,
/// handle along +x, pouring lip opposite the handle).
KeypointSet mug_keypoints(const Pose& pose, const MugGeometry& geom, ObjectRole role, const std::string& id);

struct PouringScene {
  KeypointSet master;
  Pose start;            // slave start pose
  MugGeometry slave_geom;
};

struct PouringDemo {
  PouringScene scene;
  KeypointFrameSequence sequence;
};

/// Demonstrations of pouring from a slave mug into a master mug. The slave
/// finishes with its lip above the master rim, tilted about 100 degrees.
/// Slave keypoints carry 0.5 mm Gaussian tracking noise.
std::vector<PouringDemo> pouring_demos(std::size_t count, std::uint64_t seed, std::size_t points = 120);

/// A fresh scene (target mug and slave start pose) for testing generalization.
PouringScene pouring_scene(std::uint64_t seed);

}  // namespace synth

}  // namespace vlmp
