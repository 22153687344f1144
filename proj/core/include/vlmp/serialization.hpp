#pragma once

// JSON documents exchanged by the command-line tools. Every reader throws
// vlmp::Error(ErrorKind::Parse) with the offending path on malformed input.

#include <optional>
#include <string>
#include <vector>

#include "vlmp/bridge.hpp"
#include "vlmp/data.hpp"
#include "vlmp/lfekmp.hpp"
#include "vlmp/metrics.hpp"
#include "vlmp/tpgmm.hpp"

namespace vlmp {

inline constexpr int kModelFormatVersion = 1;

enum class ModelKind { LfeKmp, TpGmm, Kmp };

const char* to_string(ModelKind kind) noexcept;
/// Accepts "lfekmp", "tpgmm" and "kmp".
ModelKind model_kind_from_string(const std::string& s);

/// Kind tag of a stored model document.
ModelKind model_kind(const std::string& json_text);

std::string to_json(const LfeKmpModel& model);
std::string to_json(const TpGmmModel& model);
std::string to_json(const KmpBaselineModel& model);
LfeKmpModel lfekmp_model_from_json(const std::string& json_text);
TpGmmModel tpgmm_model_from_json(const std::string& json_text);
KmpBaselineModel kmp_model_from_json(const std::string& json_text);

std::string gmm_to_json(const GmmModel& model);
GmmModel gmm_from_json(const std::string& json_text);

std::string task_parameters_to_json(const TaskParameters& frames);
TaskParameters task_parameters_from_json(const std::string& json_text);

std::string bundle_to_json(const DemoBundle& bundle);
DemoBundle bundle_from_json(const std::string& json_text);

/// Frames list; keypoints are given as world "xyz" or, with a top-level
/// "camera" block, as pixel "uvz" (u, v, depth).
KeypointFrameSequence keypoint_sequence_from_json(const std::string& json_text);
std::string keypoint_sequence_to_json(const KeypointFrameSequence& seq);

std::string keypoint_set_to_json(const KeypointSet& set);

struct Scenario {
  KeypointSet master;
  Pose start;
  std::optional<InteractionStats> stats;
  std::vector<FinalFrame> final_frames;
};

/// Requires either "stats" or a non-empty "final_frames".
Scenario scenario_from_json(const std::string& json_text);
std::string scenario_to_json(const Scenario& scenario);

std::string stats_to_json(const InteractionStats& stats);
InteractionStats stats_from_json(const std::string& json_text);

std::string endpose_to_json(const EndposeResult& result);
EndposeResult endpose_from_json(const std::string& json_text);

std::string trajectory_to_json(const GeneralizedTrajectory& traj);
/// Reads the "times"/"positions"/"orientations" part of a trajectory document.
PoseTrajectory pose_trajectory_from_json(const std::string& json_text);

std::string metrics_to_json(const MetricReport& report);

}  // namespace vlmp
