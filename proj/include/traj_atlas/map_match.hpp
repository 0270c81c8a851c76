#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "traj_atlas/geometry.hpp"
#include "traj_atlas/topo_graph.hpp"
#include "traj_atlas/trajectory.hpp"

namespace traj_atlas {

struct MatchOptions {
  double max_snap_m = 3.0;
  // Consecutive timestamps without a usable candidate (or with a candidate
  // that cannot be chained) before the trajectory is flagged unmatched.
  int max_gap_samples = 10;
};

struct MatchedTrajectory {
  std::string trajectory_id;
  std::vector<int> edge_sequence;  // E_T
  // Per sequence element: inclusive range of point indices attributed to it.
  std::vector<std::pair<std::size_t, std::size_t>> spans;
  std::vector<int> assignments;  // per timestamp nearest aligned edge, -1 if none
  bool matched = true;
  std::string reason;  // why the trajectory was flagged, empty when matched
};

// Nearest-edge lookup with the heading-alignment rule; shared by matching and
// prediction.
class EdgeLocator {
 public:
  EdgeLocator(const TopoGraph& g, double max_snap_m);

  struct Hit {
    int edge = -1;
    double dist = 0.0;
    PolylineProjection proj;
  };

  // All edges with polyline distance <= max_snap_m, ascending by (dist, id).
  std::vector<Hit> near(Vec2 p) const;

  // Nearest edge geometry; of it and its twin, the one whose local direction
  // has positive dot product with `heading`. nullopt if nothing qualifies.
  std::optional<Hit> aligned_nearest(Vec2 p, double heading) const;

  // Every hit whose local direction has positive dot product with `heading`,
  // in near() order.
  std::vector<Hit> aligned(Vec2 p, double heading) const;

  const TopoGraph& graph() const { return *g_; }
  double max_snap() const { return snap_; }

 private:
  const TopoGraph* g_;
  double snap_;
  SegmentIndex index_;
  std::vector<int> ids_;  // owner index -> edge id
};

// Per timestamp, the aligned edges within snap distance are scanned nearest
// first; the first that keeps the sequence connected wins: the current edge,
// a successor (never its twin), or a sibling leaving the same node, which then
// replaces the current edge. The very first pick is the nearest aligned edge.
// `traj` must carry kinematics (derive_kinematics).
MatchedTrajectory match_trajectory(const Trajectory& traj, const EdgeLocator& locator, const MatchOptions& opt = {});
MatchedTrajectory match_trajectory(const Trajectory& traj, const TopoGraph& g, const MatchOptions& opt = {});

// Matches many trajectories in parallel; output order follows input order.
std::vector<MatchedTrajectory> match_all(std::span<const Trajectory> trajs, const TopoGraph& g,
                                         const MatchOptions& opt = {});

// Audit CSV `trajectory_id,seq_index,edge_id`; unmatched trajectories are
// skipped.
void write_matches(std::ostream& out, std::span<const MatchedTrajectory> matches);

// Re-checks head-to-tail connectivity and the no-immediate-repeat rule.
bool sequence_is_valid(const TopoGraph& g, std::span<const int> seq);

struct PruneReport {
  std::size_t removed_edges = 0;
  std::size_t removed_nodes = 0;
};

// Drops edges that never appear in a matched sequence, sets traversal_count
// to the appearance count, and removes nodes left without edges.
TopoGraph prune_unused_edges(const TopoGraph& g, std::span<const MatchedTrajectory> matches,
                             PruneReport* report = nullptr);

// Observed continuations: (node, in_edge) -> out_edge -> count. Sequence
// starts are recorded with in_edge = kNoEdge at the first edge's tail node.
inline constexpr int kNoEdge = -1;
using TransitionKey = std::pair<int, int>;
using TransitionCounts = std::map<TransitionKey, std::map<int, int>>;

TransitionCounts observe_transitions(const TopoGraph& g, std::span<const MatchedTrajectory> matches);

struct ClassifyReport {
  std::size_t start = 0, end = 0, crossover = 0, decision = 0, unclassified = 0;
};

// Start: no in-edges. End: no out-edges. Decision: some in-edge has >= 2
// observed successors. Crossover: >= 2 in and >= 2 out, each in-edge with a
// single observed successor. Anything else stays Unclassified.
TopoGraph classify_nodes(TopoGraph g, const TransitionCounts& observed, ClassifyReport* report = nullptr);

}  // namespace traj_atlas
