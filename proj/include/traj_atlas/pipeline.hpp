#pragma once

#include <span>
#include <string>
#include <vector>

#include "traj_atlas/behavior.hpp"
#include "traj_atlas/map_match.hpp"
#include "traj_atlas/raster.hpp"

namespace traj_atlas {

struct MapBuildParams {
  double min_trajectory_m = 4.0;
  double max_gap_s = 1.0;
  double resolution_m = 0.25;
  double margin_m = 5.0;
  std::vector<MorphPass> morphology = {{MorphOp::Close, 1}, {MorphOp::Open, 1}};
  std::uint32_t threshold = 2;
  int max_spur_px = 8;
  double simplify_tolerance_m = 0.3;
  // Junction pairs joined by a shorter edge collapse into one node; 0 disables.
  double merge_junctions_m = 3.0;
  MatchOptions match;
  BehaviorParams behavior;
};

struct BuildDiagnostics {
  std::size_t input_trajectories = 0;
  std::size_t usable_trajectories = 0;  // after gap splitting and length trim
  std::size_t skipped_pixels = 0;
  std::size_t skeleton_pixels = 0;
  std::size_t dropped_pixels = 0;
  std::size_t raw_nodes = 0;
  std::size_t raw_edges = 0;
  std::size_t merged_junctions = 0;
  std::vector<std::string> unmatched_ids;
  PruneReport prune;
  ClassifyReport classes;
};

struct BuildResult {
  BehaviorMap map;
  BuildDiagnostics diag;
  std::vector<Trajectory> trajectories;  // preprocessed, with kinematics
  std::vector<MatchedTrajectory> matches;  // parallel to `trajectories`
  RasterGrid density;  // after morphology
  Skeleton skeleton;   // after cleanup
};

// Gap splitting, length trim and kinematics.
std::vector<Trajectory> preprocess(std::span<const Trajectory> raw, const MapBuildParams& p);

// Full map construction. Module errors are rethrown with the stage name
// prefixed; the error class is preserved.
BuildResult build_behavior_map(std::span<const Trajectory> raw, const MapBuildParams& p = {});

}  // namespace traj_atlas
