#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "traj_atlas/metrics.hpp"
#include "traj_atlas/pipeline.hpp"
#include "traj_atlas/predictor.hpp"

namespace traj_atlas {

struct EvalOptions {
  std::vector<double> horizons_m = {4.0, 8.0, 12.0, 16.0, 20.0};
  bool split = true;            // false: evaluate on the map's own training data
  double split_ratio = 0.8;     // share of trajectories used to build the map
  std::uint64_t seed = 1;       // shuffles the split
  double prefix_s = 2.0;        // observed history fed to the predictors
  double stride_s = 1.0;        // spacing of evaluation start points
  double cyra_fit_window_s = 1.0;
  // Predictions are requested this far, so that resampling at ground truth
  // timestamps rarely runs off their end.
  double prediction_length_m = 60.0;
  MetricWeights weights;
};

void validate(const EvalOptions& o);

inline constexpr const char* kMethodTop1 = "graph-top1";
inline constexpr const char* kMethodExpected = "graph-expected";
inline constexpr const char* kMethodCyra = "cyra";

struct ReportRow {
  std::string method;
  double horizon_m = 0.0;
  std::size_t n = 0;
  double mean = 0.0, median = 0.0, p25 = 0.0, p75 = 0.0;
};

struct EvalReport {
  std::vector<ReportRow> rows;  // method-major, horizons ascending
  std::size_t train_trajectories = 0;
  std::size_t test_trajectories = 0;
  std::size_t cases = 0;        // evaluation start points with map coverage
  std::size_t no_coverage = 0;  // start points the graph predictor could not serve
  std::size_t path_cases = 0;   // cases with a matched ground truth sequence
  std::size_t path_hits = 0;    // ... where the top hypothesis follows it

  double path_choice_rate() const { return path_cases ? static_cast<double>(path_hits) / path_cases : 0.0; }
  const ReportRow* row(const std::string& method, double horizon_m) const;
};

// Per start point and horizon: combined error of every method.
struct CaseErrors {
  std::string trajectory_id;
  double t_start = 0.0;
  std::vector<double> top1, expected, cyra;  // per horizon; NaN when excluded
  std::vector<double> hypothesis_probability;
  std::vector<std::vector<double>> hypothesis_error;  // [hypothesis][horizon]
  bool path_known = false;
  bool path_hit = false;
};

struct SplitResult {
  std::vector<Trajectory> train, test;
};

// Deterministic shuffle of trajectory indices by seed, first ratio*n to train.
SplitResult split_trajectories(std::span<const Trajectory> trajs, double ratio, std::uint64_t seed);

// Points of `pred` at the given timestamps (clamped to its time span).
Trajectory resample_at(const Trajectory& pred, std::span<const double> times);

// Ground truth from index `start` until `horizon_m` of arc length has been
// covered. Returns an empty trajectory if the remaining track is shorter.
Trajectory ground_truth_window(const Trajectory& traj, std::size_t start, double horizon_m);

// Probability-weighted mean of per-hypothesis errors. Sizes must match.
double expected_error(std::span<const double> probability, std::span<const double> error);

// Linear interpolation between order statistics; q in [0, 1].
double percentile(std::vector<double> values, double q);

// Evaluates prepared (preprocessed) test trajectories against a built map.
std::vector<CaseErrors> evaluate_cases(const BehaviorMap& map, std::span<const Trajectory> test,
                                       const EvalOptions& o, const PredictorParams& pp, const MatchOptions& mo);

EvalReport aggregate(std::span<const CaseErrors> cases, const EvalOptions& o);

struct Evaluation {
  EvalReport report;
  std::vector<CaseErrors> cases;
  BuildResult build;
};

// Split, build the map from the training part, evaluate the test part.
Evaluation evaluate_split(std::span<const Trajectory> raw, const MapBuildParams& bp, const PredictorParams& pp,
                          const EvalOptions& o);

// report.csv and comparison.svg in out_dir (created if missing).
void emit_report(const EvalReport& r, const std::filesystem::path& out_dir);
void write_report_csv(std::ostream& out, const EvalReport& r);
std::vector<ReportRow> parse_report_csv(std::istream& in);
void write_comparison_svg(std::ostream& out, const EvalReport& r);

}  // namespace traj_atlas
