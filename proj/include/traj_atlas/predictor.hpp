#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "traj_atlas/behavior.hpp"
#include "traj_atlas/map_match.hpp"
#include "traj_atlas/trajectory.hpp"

namespace traj_atlas {

struct PredictorParams {
  double max_snap_m = 3.0;
  double heading_weight = 1.0;  // w_theta in the association score
  double speed_window_s = 1.0;  // v_m = mean derived speed over this tail
  double lookback_m = 10.0;     // approach window when re-evaluating v at later nodes
  double min_segment_m = 5.0;   // lower bound on the blended segment span
};

// Edge association from position and heading: among edges within max_snap_m,
// minimise dist / max_snap_m + w * (1 - cos(heading difference)), ties to the
// smaller id. Throws NoCoverageError if nothing is in range.
EdgeLocator::Hit associate_edge(const EdgeLocator& locator, Vec2 pos, double heading, double heading_weight);

// Depth-first expansion over observed successors, starting `start_arc_m` into
// `start_edge`. A branch stops once its length from the start point reaches
// horizon_m or when its last edge has no observed successor.
std::vector<std::vector<int>> enumerate_sequences(const BehaviorMap& map, int start_edge, double start_arc_m,
                                                  double horizon_m);

struct InterpolationTrace {
  double v_m = 0.0;
  double v_slow = 0.0, v_fast = 0.0;
  double delta_slow = 0.0, delta_fast = 0.0, delta = 0.0;
  int slow_cluster = 0, fast_cluster = 0;
  std::map<int, double> p_slow, p_fast, p;  // successor -> probability
};

// Blends the rows of the clusters whose centres bracket v_m. Outside the
// centre range, or with a single cluster, the nearest row is used as is.
InterpolationTrace interpolate_probability(double v_m, std::span<const VelocityCluster> clusters);

// Blends the first n_seg points of `proto` starting at `cut` onto
// `observed_end`: point k moves by (1 - k / (n_seg - 1)) * v_n with
// v_n = observed_end - proto[cut]. Returns only the blended points; times are
// carried over from the prototype unchanged.
Trajectory transform_segment(const Trajectory& proto, Vec2 observed_end, std::size_t cut, std::size_t n_seg);

struct PredictionHypothesis {
  Trajectory trajectory;
  double probability = 0.0;
  std::vector<int> edge_sequence;
  std::vector<InterpolationTrace> decisions;  // one per traversed transition
};

enum class PredictStatus { Ok, NoCoverage };

struct PredictionResult {
  PredictStatus status = PredictStatus::Ok;
  std::string message;
  int start_edge = -1;
  double v_m = 0.0;
  std::vector<PredictionHypothesis> hypotheses;  // descending probability
};

class Predictor {
 public:
  Predictor(const BehaviorMap& map, PredictorParams params = {});
  Predictor(BehaviorMap&&, PredictorParams = {}) = delete;  // keeps a pointer to the map

  // `observed` needs >= 2 points; kinematics are derived if missing.
  PredictionResult predict(const Trajectory& observed, double horizon_m) const;

  const PredictorParams& params() const { return params_; }
  const EdgeLocator& locator() const { return locator_; }

 private:
  const Trajectory& start_prototype(int edge, Vec2 at, double v_m) const;
  const Trajectory& successor_prototype(const TransitionTable* table, int cluster, int edge) const;

  const BehaviorMap* map_;
  PredictorParams params_;
  EdgeLocator locator_;
  std::map<int, Trajectory> fallback_;  // polyline prototypes for edges without data
};

// Mean derived speed over the trailing window of `traj`.
double recent_speed(const Trajectory& traj, double window_s);

nlohmann::json prediction_to_json(const PredictionResult& r);

}  // namespace traj_atlas
