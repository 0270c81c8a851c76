#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "traj_atlas/trajectory.hpp"

namespace traj_atlas {

enum class Maneuver { Straight, Left, Right };
std::string to_string(Maneuver m);

struct ManeuverProfile {
  double weight = 1.0;          // relative demand
  double approach_speed = 10.0; // m/s on the arms
  double turn_speed = 10.0;     // m/s inside the box
};

// Right-hand traffic four-arm intersection. Arm k points outwards along
// arm_headings_deg[k]; every arm carries an inbound and an outbound lane.
struct ScenarioConfig {
  std::vector<double> arm_headings_deg = {0.0, 90.0, 180.0, 270.0};
  double lane_offset_m = 2.5;   // lane centre to arm axis
  double box_half_m = 15.0;     // half-size of the square junction box
  double arm_length_m = 50.0;
  ManeuverProfile straight{0.3, 13.0, 13.0};
  ManeuverProfile left{0.35, 9.5, 6.5};
  ManeuverProfile right{0.35, 6.0, 3.0};
  double speed_sigma_mps = 0.35;  // per-vehicle speed offset
  double decel_distance_m = 20.0; // speed ramps between approach and turn speed
  double lateral_sigma_m = 0.4;   // per-vehicle constant lane offset
  double noise_sigma_m = 0.05;    // per-sample position noise
  double dt_s = 0.1;
  int count = 400;
  std::uint64_t seed = 1;
};

void validate(const ScenarioConfig& c);

// Noise-free lane centreline of one maneuver, sampled every `step_m`.
std::vector<Vec2> maneuver_centerline(const ScenarioConfig& c, std::size_t arm, Maneuver m, double step_m = 0.5);

// Index of the arm a maneuver from `arm` exits through.
std::size_t exit_arm(const ScenarioConfig& c, std::size_t arm, Maneuver m);

struct ScenarioTrajectory {
  Trajectory trajectory;
  std::size_t entry_arm = 0;
  Maneuver maneuver = Maneuver::Straight;
};

// Deterministic in the seed. Ids are "v<index>".
std::vector<ScenarioTrajectory> generate_scenario(const ScenarioConfig& c);
std::vector<Trajectory> scenario_trajectories(const ScenarioConfig& c);

}  // namespace traj_atlas
