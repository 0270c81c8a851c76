#include "traj_atlas/metrics.hpp"

#include <cmath>

#include "traj_atlas/error.hpp"

namespace traj_atlas {

void validate(const MetricWeights& w) {
  if (w.medt < 0.0 || w.medp < 0.0 || w.god < 0.0 || w.avd < 0.0)
    throw ValidationError("metric weights must be >= 0");
}

double medt(const Trajectory& pred, const Trajectory& gt) {
  if (pred.empty() || gt.empty()) throw ValidationError("medt needs non-empty trajectories");
  const double t0 = gt.points.front().t, t1 = gt.points.back().t;
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& p : pred.points) {
    if (p.t < t0 || p.t > t1) continue;
    sum += distance(p.pos(), position_at_time(gt, p.t));
    ++n;
  }
  if (n == 0) throw ValidationError("medt: no temporal overlap");
  return sum / static_cast<double>(n);
}

double medp(const Trajectory& pred, const Trajectory& gt) {
  if (pred.empty() || gt.empty()) throw ValidationError("medp needs non-empty trajectories");
  const auto line = positions(gt);
  double sum = 0.0;
  for (const auto& p : pred.points)
    sum += line.size() == 1 ? distance(p.pos(), line[0]) : project_onto_polyline(p.pos(), line).dist;
  return sum / static_cast<double>(pred.size());
}

double god(const Trajectory& pred, const Trajectory& gt, bool* degenerate) {
  if (pred.size() < 2 || gt.size() < 2) throw ValidationError("god needs at least 2 points per trajectory");
  const Vec2 a = pred.points.back().pos() - pred.points.front().pos();
  const Vec2 b = gt.points.back().pos() - gt.points.front().pos();
  const bool zero = norm(a) == 0.0 || norm(b) == 0.0;
  if (degenerate) *degenerate = zero;
  if (zero) return 0.0;
  return std::abs(std::atan2(cross(a, b), dot(a, b)));
}

double avd(const Trajectory& pred, const Trajectory& gt) {
  if (pred.size() < 2 || gt.size() < 2) throw ValidationError("avd needs at least 2 points per trajectory");
  auto mean_speed = [](const Trajectory& t) {
    const double d = t.duration();
    return d > 0.0 ? path_length(t) / d : 0.0;
  };
  return std::abs(mean_speed(pred) - mean_speed(gt));
}

SimilarityBreakdown combined_measure(const Trajectory& pred, const Trajectory& gt, const MetricWeights& w) {
  validate(w);
  SimilarityBreakdown b;
  b.medt = medt(pred, gt);
  b.medp = medp(pred, gt);
  if (pred.size() >= 2 && gt.size() >= 2) {
    b.god = god(pred, gt, &b.god_degenerate);
    b.avd = avd(pred, gt);
  } else {
    b.god_degenerate = true;
  }
  b.combined = w.medt * b.medt + w.medp * b.medp + w.god * b.god + w.avd * b.avd;
  return b;
}

}  // namespace traj_atlas
