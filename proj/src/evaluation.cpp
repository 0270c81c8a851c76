#include "traj_atlas/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <spdlog/spdlog.h>

#include "traj_atlas/cyra.hpp"
#include "traj_atlas/error.hpp"

namespace traj_atlas {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

void validate(const EvalOptions& o) {
  if (o.horizons_m.empty()) throw ValidationError("at least one horizon is required");
  for (std::size_t i = 0; i < o.horizons_m.size(); ++i) {
    if (!(o.horizons_m[i] > 0.0)) throw ValidationError("horizons must be > 0");
    if (i > 0 && !(o.horizons_m[i] > o.horizons_m[i - 1])) throw ValidationError("horizons must be strictly increasing");
  }
  if (!(o.split_ratio > 0.0 && o.split_ratio < 1.0)) throw ValidationError("split_ratio must lie in (0, 1)");
  if (!(o.prefix_s > 0.0)) throw ValidationError("prefix_s must be > 0");
  if (!(o.stride_s > 0.0)) throw ValidationError("stride_s must be > 0");
  if (!(o.cyra_fit_window_s > 0.0)) throw ValidationError("cyra_fit_window_s must be > 0");
  if (!(o.prediction_length_m >= o.horizons_m.back()))
    throw ValidationError("prediction_length_m must cover the largest horizon");
  validate(o.weights);
}

const ReportRow* EvalReport::row(const std::string& method, double horizon_m) const {
  for (const auto& r : rows)
    if (r.method == method && r.horizon_m == horizon_m) return &r;
  return nullptr;
}

SplitResult split_trajectories(std::span<const Trajectory> trajs, double ratio, std::uint64_t seed) {
  std::vector<std::size_t> idx(trajs.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  const auto n_train = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(trajs.size())));
  std::vector<bool> train(trajs.size(), false);
  for (std::size_t k = 0; k < n_train && k < idx.size(); ++k) train[idx[k]] = true;
  SplitResult s;
  for (std::size_t i = 0; i < trajs.size(); ++i) (train[i] ? s.train : s.test).push_back(trajs[i]);
  return s;
}

Trajectory resample_at(const Trajectory& pred, std::span<const double> times) {
  Trajectory out;
  out.id = pred.id;
  for (double t : times) {
    const Vec2 p = position_at_time(pred, t);
    out.points.push_back({t, p.x, p.y});
  }
  return out;
}

Trajectory ground_truth_window(const Trajectory& traj, std::size_t start, double horizon_m) {
  const Trajectory rest = slice(traj, start, traj.size() - 1);
  if (path_length(rest) < horizon_m) return {};
  return truncate_at_arc(rest, horizon_m);
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw ValidationError("percentile of an empty set");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (values[hi] - values[lo]) * (pos - static_cast<double>(lo));
}

double expected_error(std::span<const double> probability, std::span<const double> error) {
  if (probability.size() != error.size()) throw ValidationError("one probability per hypothesis error");
  double e = 0.0;
  for (std::size_t k = 0; k < error.size(); ++k) e += probability[k] * error[k];
  return e;
}

namespace {

bool contains_run(std::span<const int> seq, std::span<const int> run) {
  if (run.empty() || run.size() > seq.size()) return false;
  return std::search(seq.begin(), seq.end(), run.begin(), run.end()) != seq.end();
}

std::vector<CaseErrors> evaluate_one(const Predictor& predictor, const EdgeLocator& locator, const Trajectory& traj,
                                     const EvalOptions& o, const MatchOptions& mo) {
  std::vector<CaseErrors> out;
  if (traj.size() < 3) return out;
  const auto gt_match = match_trajectory(traj, locator, mo);
  const double t0 = traj.points.front().t;
  double next_start = t0 + o.prefix_s;
  std::size_t first = 0;
  for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
    const double ti = traj.points[i].t;
    if (ti < next_start - 1e-9) continue;
    next_start = ti + o.stride_s;
    while (traj.points[first].t < ti - o.prefix_s - 1e-9) ++first;
    const Trajectory observed = slice(traj, first, i);
    if (observed.size() < 3) continue;

    CaseErrors ce;
    ce.trajectory_id = traj.id;
    ce.t_start = ti;
    const auto pred = predictor.predict(observed, o.prediction_length_m);
    if (pred.status != PredictStatus::Ok || pred.hypotheses.empty()) {
      ce.top1.clear();  // marks a coverage failure
      out.push_back(std::move(ce));
      continue;
    }
    const VehicleState state = estimate_cyra_state(observed, o.cyra_fit_window_s);
    const std::size_t H = o.horizons_m.size();
    ce.top1.assign(H, kNaN);
    ce.expected.assign(H, kNaN);
    ce.cyra.assign(H, kNaN);
    for (const auto& h : pred.hypotheses) ce.hypothesis_probability.push_back(h.probability);
    ce.hypothesis_error.assign(pred.hypotheses.size(), std::vector<double>(H, kNaN));

    for (std::size_t hz = 0; hz < H; ++hz) {
      const Trajectory gt = ground_truth_window(traj, i, o.horizons_m[hz]);
      if (gt.size() < 2) continue;
      std::vector<double> times;
      for (std::size_t k = 1; k < gt.size(); ++k) times.push_back(gt.points[k].t);
      std::vector<double> errs(pred.hypotheses.size());
      for (std::size_t k = 0; k < pred.hypotheses.size(); ++k) {
        errs[k] = combined_measure(resample_at(pred.hypotheses[k].trajectory, times), gt, o.weights).combined;
        ce.hypothesis_error[k][hz] = errs[k];
      }
      ce.top1[hz] = errs[0];
      ce.expected[hz] = expected_error(ce.hypothesis_probability, errs);
      Trajectory cy;
      for (double t : times) {
        const auto c = cyra_at(state, t - ti);
        cy.points.push_back({t, c.pos.x, c.pos.y});
      }
      ce.cyra[hz] = combined_measure(cy, gt, o.weights).combined;
    }
    if (gt_match.matched) {
      ce.path_known = true;
      ce.path_hit = contains_run(gt_match.edge_sequence, pred.hypotheses.front().edge_sequence);
    }
    out.push_back(std::move(ce));
  }
  return out;
}

}  // namespace

std::vector<CaseErrors> evaluate_cases(const BehaviorMap& map, std::span<const Trajectory> test,
                                       const EvalOptions& o, const PredictorParams& pp, const MatchOptions& mo) {
  validate(o);
  const Predictor predictor(map, pp);
  const EdgeLocator locator(map.graph, mo.max_snap_m);
  std::vector<std::vector<CaseErrors>> per(test.size());
  const long long n = static_cast<long long>(test.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (long long i = 0; i < n; ++i) per[i] = evaluate_one(predictor, locator, test[i], o, mo);
  std::vector<CaseErrors> out;
  for (auto& v : per)
    for (auto& c : v) out.push_back(std::move(c));
  return out;
}

EvalReport aggregate(std::span<const CaseErrors> cases, const EvalOptions& o) {
  EvalReport r;
  for (const auto& c : cases) {
    if (c.top1.empty()) {
      ++r.no_coverage;
      continue;
    }
    ++r.cases;
    if (c.path_known) {
      ++r.path_cases;
      if (c.path_hit) ++r.path_hits;
    }
  }
  const std::pair<const char*, std::vector<double> CaseErrors::*> methods[] = {
      {kMethodTop1, &CaseErrors::top1}, {kMethodExpected, &CaseErrors::expected}, {kMethodCyra, &CaseErrors::cyra}};
  for (const auto& [name, member] : methods) {
    for (std::size_t hz = 0; hz < o.horizons_m.size(); ++hz) {
      std::vector<double> v;
      for (const auto& c : cases) {
        const auto& vals = c.*member;
        if (hz < vals.size() && !std::isnan(vals[hz])) v.push_back(vals[hz]);
      }
      ReportRow row;
      row.method = name;
      row.horizon_m = o.horizons_m[hz];
      row.n = v.size();
      if (!v.empty()) {
        double s = 0.0;
        for (double x : v) s += x;
        row.mean = s / static_cast<double>(v.size());
        row.median = percentile(v, 0.5);
        row.p25 = percentile(v, 0.25);
        row.p75 = percentile(v, 0.75);
      }
      r.rows.push_back(row);
    }
  }
  return r;
}

Evaluation evaluate_split(std::span<const Trajectory> raw, const MapBuildParams& bp, const PredictorParams& pp,
                          const EvalOptions& o) {
  validate(o);
  SplitResult split;
  if (o.split) {
    split = split_trajectories(raw, o.split_ratio, o.seed);
  } else {
    split.train.assign(raw.begin(), raw.end());
    split.test = split.train;
  }
  if (split.train.empty() || split.test.empty()) throw ValidationError("split leaves an empty train or test set");
  Evaluation ev;
  ev.build = build_behavior_map(split.train, bp);
  const auto test = preprocess(split.test, bp);
  spdlog::debug("evaluate: {} train, {} test trajectories", split.train.size(), test.size());
  ev.cases = evaluate_cases(ev.build.map, test, o, pp, bp.match);
  ev.report = aggregate(ev.cases, o);
  ev.report.train_trajectories = split.train.size();
  ev.report.test_trajectories = split.test.size();
  return ev;
}

}  // namespace traj_atlas
