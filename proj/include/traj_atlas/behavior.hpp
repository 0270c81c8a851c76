#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "traj_atlas/map_match.hpp"
#include "traj_atlas/topo_graph.hpp"
#include "traj_atlas/trajectory.hpp"

namespace traj_atlas {

struct ClusterParams {
  double eps_mps = 1.5;        // density neighbourhood radius
  int min_lns = 3;             // neighbourhood size for a core sample
  double merge_gap_mps = 2.0;  // agglomerative cut on group centres
};

// A run of velocity samples; `members` index into the caller's sample list.
struct VelocityGroup {
  double center = 0.0;
  std::vector<std::size_t> members;
};

// Two stages: density grouping of the 1-D samples (eps-neighbourhood with
// min_lns core rule), then single-linkage merging of groups whose centres lie
// closer than merge_gap. Noise joins the nearest surviving group. Output is a
// partition sorted by centre; if no core sample exists everything forms one
// group.
std::vector<VelocityGroup> cluster_velocities(std::span<const double> samples, const ClusterParams& p = {});

// Mean derived speed over the arc-length window [d - lookback_m, d] where d is
// the trajectory's closest approach to `node`; a window reaching before the
// track start averages what exists. Throws ValidationError when the
// trajectory never comes within `max_snap_m` of the node.
double sample_approach_velocity(const Trajectory& traj, Vec2 node, double lookback_m, double max_snap_m);

// Mean derived speed over the first `lookback_m` of arc length from point
// `first`. Used for sequence starts, where there is no approach.
double departure_velocity(const Trajectory& traj, std::size_t first, double lookback_m);

struct PrototypeParams {
  double step_m = 0.5;  // resampling step and minimum sweep spacing
  int min_lns = 3;      // members required at a sweep position
};

// Representative trajectory of members that share an edge: members are
// resampled by arc length, a sweep runs along their average direction, and
// each sweep position emits the mean member position and speed where at least
// min(min_lns, members) members are present. Timestamps start at 0 and follow
// the mean speed profile. nullopt when no sweep position qualifies.
std::optional<Trajectory> extract_prototype(std::span<const Trajectory> members, const PrototypeParams& p = {});

// Polyline-shaped prototype at constant speed; used when no member data exists.
Trajectory polyline_prototype(std::span<const Vec2> polyline, double speed_mps, double step_m);

struct VelocityCluster {
  int index = 0;
  double center_mps = 0.0;
  std::vector<std::string> member_ids;
  int n = 0;
  std::map<int, int> counts;          // out edge -> n_ij
  std::map<int, double> transitions;  // out edge -> tp_ij = n_ij / n_i
  std::map<int, Trajectory> prototypes;  // out edge -> prototype for this cluster
};

// Per (node, in_edge) velocity-conditioned continuation statistics; in_edge is
// kNoEdge for trajectories that start at the node.
struct TransitionTable {
  int node = 0;
  int in_edge = kNoEdge;
  std::vector<VelocityCluster> clusters;  // ascending centre

  std::vector<int> successors() const;
};

struct BehaviorParams {
  double lookback_m = 10.0;
  double max_snap_m = 3.0;
  ClusterParams clustering;
  PrototypeParams prototype;
};

struct BehaviorMap {
  TopoGraph graph;
  std::vector<TransitionTable> tables;  // sorted by (node, in_edge)
  std::map<int, Trajectory> edge_prototypes;  // all traversals of an edge

  const TransitionTable* table(int node, int in_edge) const;
  // Edges observed to follow `edge` (ascending).
  std::vector<int> successors(int edge) const;
};

// Builds clusters, tables and prototypes from matched trajectories.
// `trajs` and `matches` are parallel arrays; trajectories need kinematics.
BehaviorMap build_behavior(TopoGraph graph, std::span<const Trajectory> trajs,
                           std::span<const MatchedTrajectory> matches, const BehaviorParams& p = {});

// The slice of `traj` attributed to sequence element `k`, padded by one point
// on each side so consecutive pieces overlap.
Trajectory edge_piece(const Trajectory& traj, const MatchedTrajectory& m, std::size_t k);

void to_json(nlohmann::json& j, const BehaviorMap& m);
void from_json(const nlohmann::json& j, BehaviorMap& m);

BehaviorMap load_behavior_map(const std::filesystem::path& path);
void save_behavior_map(const std::filesystem::path& path, const BehaviorMap& m);

}  // namespace traj_atlas
