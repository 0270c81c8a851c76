#pragma once

#include "traj_atlas/trajectory.hpp"

namespace traj_atlas {

// Least-squares fit over the trailing `fit_window_s`: chord speeds and
// unwrapped chord headings at chord midpoint times, each fitted with a line.
// The state is reported at the last observed point. Needs >= 3 points in the
// window.
VehicleState estimate_cyra_state(const Trajectory& observed, double fit_window_s = 1.0);

struct CyraSample {
  Vec2 pos;
  double heading = 0.0;
  double speed = 0.0;
};

// Exact constant-yaw-rate / linear-acceleration motion after `tau` seconds.
// Speed is floored at zero: once the vehicle stops it stays put.
CyraSample cyra_at(const VehicleState& s, double tau);

// Samples cyra_at every dt_s from t0 until the travelled arc reaches
// horizon_m, the vehicle stands still, or max_duration_s elapses.
Trajectory cyra_predict(const VehicleState& s, double horizon_m, double dt_s, double t0 = 0.0,
                        double max_duration_s = 60.0);

}  // namespace traj_atlas
