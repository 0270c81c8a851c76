#pragma once

#include "traj_atlas/trajectory.hpp"

namespace traj_atlas {

struct MetricWeights {
  double medt = 0.5;
  double medp = 0.5;
  double god = 0.0;
  double avd = 0.0;
};

void validate(const MetricWeights& w);

struct SimilarityBreakdown {
  double medt = 0.0;  // m
  double medp = 0.0;  // m
  double god = 0.0;   // rad
  double avd = 0.0;   // m/s
  double combined = 0.0;
  bool god_degenerate = false;  // a displacement was zero, god reported as 0
};

// Mean distance from each predicted point inside the ground truth's time span
// to the ground truth position at the same time. Throws if no predicted point
// overlaps that span.
double medt(const Trajectory& pred, const Trajectory& gt);

// Mean distance from each predicted point to the ground truth polyline.
double medp(const Trajectory& pred, const Trajectory& gt);

// Angle between end-to-end displacements; 0 when either is zero.
double god(const Trajectory& pred, const Trajectory& gt, bool* degenerate = nullptr);

// |mean speed(pred) - mean speed(gt)| with mean speed = path length / duration.
double avd(const Trajectory& pred, const Trajectory& gt);

SimilarityBreakdown combined_measure(const Trajectory& pred, const Trajectory& gt, const MetricWeights& w = {});

}  // namespace traj_atlas
