#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "traj_atlas/geometry.hpp"

namespace traj_atlas {

struct TrajectoryPoint {
  double t = 0.0;  // seconds
  double x = 0.0;  // meters, world frame
  double y = 0.0;

  Vec2 pos() const { return {x, y}; }
  bool operator==(const TrajectoryPoint&) const = default;
};

// A timestamped 2-D track. `speed` and `heading` are empty until
// derive_kinematics() fills them (one entry per point).
struct Trajectory {
  std::string id;
  std::vector<TrajectoryPoint> points;
  std::vector<double> speed;    // m/s
  std::vector<double> heading;  // rad, (-pi, pi]

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  bool has_kinematics() const { return speed.size() == points.size() && !points.empty(); }
  double duration() const { return points.empty() ? 0.0 : points.back().t - points.front().t; }
};

struct VehicleState {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;     // rad
  double speed = 0.0;       // m/s, >= 0
  double yaw_rate = 0.0;    // rad/s
  double acceleration = 0.0;  // m/s^2
};

// --- CSV I/O (`trajectory_id,t_s,x_m,y_m`) ---------------------------------

// Rows of different ids may interleave; within one id timestamps must
// increase. Trajectories come back in order of first appearance.
std::vector<Trajectory> parse_trajectories(std::istream& in);
std::vector<Trajectory> load_trajectories(const std::filesystem::path& path);

// Shortest round-trip formatting, so load(save(x)) is bit-exact.
void write_trajectories(std::ostream& out, std::span<const Trajectory> trajs);
void save_trajectories(const std::filesystem::path& path, std::span<const Trajectory> trajs);

// --- kinematics --------------------------------------------------------------

Trajectory derive_kinematics(Trajectory traj);

// Splits at time gaps > max_gap_s and drops pieces shorter than min_length_m.
// Pieces keep the parent id with a `#k` suffix when a split happened.
std::vector<Trajectory> split_and_trim(const Trajectory& traj, double min_length_m,
                                       double max_gap_s = 1.0);

// --- helpers -----------------------------------------------------------------

std::vector<Vec2> positions(const Trajectory& traj);
double path_length(const Trajectory& traj);

// Inclusive index range copy; kinematics are sliced along when present.
Trajectory slice(const Trajectory& traj, std::size_t first, std::size_t last);

// Linear interpolation in time, clamped to the trajectory's time span.
Vec2 position_at_time(const Trajectory& traj, double t);

// Prefix up to (and including the interpolated point at) arc length `s`.
Trajectory truncate_at_arc(const Trajectory& traj, double s);

}  // namespace traj_atlas
