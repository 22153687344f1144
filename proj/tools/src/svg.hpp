#pragma once

#include <string>
#include <vector>

#include "vlmp/manifold.hpp"

namespace vlmp::cli {

struct PlotSeries {
  std::string label;
  std::string color;
  std::vector<PoseTrajectory> trajectories;
  double stroke_width = 1.5;
  bool dashed = false;
};

/// Overlay of trajectories (x-y projection) with a "+" at every start point,
/// a "*" at every end point and a legend.
std::string render_svg(const std::vector<PlotSeries>& series, const std::string& title);

}  // namespace vlmp::cli
