#include "traj_atlas/geometry.hpp"

#include <algorithm>
#include <limits>
#include <numbers>

namespace traj_atlas {

double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a, two_pi);
  if (a <= -std::numbers::pi) a += two_pi;
  if (a > std::numbers::pi) a -= two_pi;
  return a;
}

SegmentProjection project_onto_segment(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  double t = 0.0;
  if (len2 > 0.0) t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  const Vec2 q = a + ab * t;
  return {q, t, distance(p, q)};
}

PolylineProjection project_onto_polyline(Vec2 p, std::span<const Vec2> line) {
  PolylineProjection best;
  if (line.empty()) return best;
  if (line.size() == 1) {
    best.point = line[0];
    best.dist = distance(p, line[0]);
    return best;
  }
  best.dist = std::numeric_limits<double>::infinity();
  double arc = 0.0;
  for (std::size_t i = 0; i + 1 < line.size(); ++i) {
    const auto proj = project_onto_segment(p, line[i], line[i + 1]);
    const double seg_len = distance(line[i], line[i + 1]);
    if (proj.dist < best.dist) {
      best = {proj.point, i, proj.t, proj.dist, arc + proj.t * seg_len};
    }
    arc += seg_len;
  }
  return best;
}

double arc_length(std::span<const Vec2> line) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < line.size(); ++i) s += distance(line[i], line[i + 1]);
  return s;
}

std::vector<double> cumulative_arc(std::span<const Vec2> line) {
  std::vector<double> cum(line.size(), 0.0);
  for (std::size_t i = 1; i < line.size(); ++i) cum[i] = cum[i - 1] + distance(line[i - 1], line[i]);
  return cum;
}

Vec2 segment_direction(std::span<const Vec2> line, std::size_t segment) {
  const std::size_t n = line.size();
  if (n < 2) return {1.0, 0.0};
  segment = std::min(segment, n - 2);
  for (std::size_t off = 0; off < n; ++off) {
    for (long long cand : {static_cast<long long>(segment + off), static_cast<long long>(segment) - static_cast<long long>(off)}) {
      if (cand < 0 || cand + 1 >= static_cast<long long>(n)) continue;
      const Vec2 d = line[cand + 1] - line[cand];
      const double len = norm(d);
      if (len > 0.0) return d * (1.0 / len);
    }
  }
  return {1.0, 0.0};
}

Vec2 point_at_arc(std::span<const Vec2> line, std::span<const double> cum, double s) {
  if (line.empty()) return {};
  if (s <= 0.0 || line.size() == 1) return line.front();
  if (s >= cum.back()) return line.back();
  const auto it = std::upper_bound(cum.begin(), cum.end(), s);
  const std::size_t i = static_cast<std::size_t>(it - cum.begin()) - 1;
  const double seg = cum[i + 1] - cum[i];
  const double t = seg > 0.0 ? (s - cum[i]) / seg : 0.0;
  return line[i] + (line[i + 1] - line[i]) * t;
}

namespace {

void douglas_peucker(std::span<const Vec2> line, std::size_t first, std::size_t last, double tol,
                     std::vector<bool>& keep) {
  if (last <= first + 1) return;
  double worst = -1.0;
  std::size_t worst_i = first;
  for (std::size_t i = first + 1; i < last; ++i) {
    const double d = project_onto_segment(line[i], line[first], line[last]).dist;
    if (d > worst) {
      worst = d;
      worst_i = i;
    }
  }
  if (worst > tol) {
    keep[worst_i] = true;
    douglas_peucker(line, first, worst_i, tol, keep);
    douglas_peucker(line, worst_i, last, tol, keep);
  }
}

}  // namespace

std::vector<Vec2> simplify_polyline(std::span<const Vec2> line, double tolerance) {
  if (line.size() <= 2) return {line.begin(), line.end()};
  std::vector<bool> keep(line.size(), false);
  keep.front() = keep.back() = true;
  douglas_peucker(line, 0, line.size() - 1, tolerance, keep);
  std::vector<Vec2> out;
  for (std::size_t i = 0; i < line.size(); ++i)
    if (keep[i]) out.push_back(line[i]);
  return out;
}

SegmentIndex::SegmentIndex(double cell_size) : cell_(cell_size) {}

void SegmentIndex::insert(std::size_t owner, std::span<const Vec2> line) {
  auto add_box = [&](Vec2 a, Vec2 b) {
    const long long x0 = static_cast<long long>(std::floor(std::min(a.x, b.x) / cell_));
    const long long x1 = static_cast<long long>(std::floor(std::max(a.x, b.x) / cell_));
    const long long y0 = static_cast<long long>(std::floor(std::min(a.y, b.y) / cell_));
    const long long y1 = static_cast<long long>(std::floor(std::max(a.y, b.y) / cell_));
    for (long long cx = x0; cx <= x1; ++cx)
      for (long long cy = y0; cy <= y1; ++cy) {
        auto& bucket = cells_[key(cx, cy)];
        if (bucket.empty() || bucket.back() != owner) bucket.push_back(owner);
      }
  };
  if (line.size() == 1) add_box(line[0], line[0]);
  for (std::size_t i = 0; i + 1 < line.size(); ++i) add_box(line[i], line[i + 1]);
}

std::vector<std::size_t> SegmentIndex::owners_near(Vec2 p, double radius) const {
  std::vector<std::size_t> out;
  const long long x0 = static_cast<long long>(std::floor((p.x - radius) / cell_));
  const long long x1 = static_cast<long long>(std::floor((p.x + radius) / cell_));
  const long long y0 = static_cast<long long>(std::floor((p.y - radius) / cell_));
  const long long y1 = static_cast<long long>(std::floor((p.y + radius) / cell_));
  for (long long cx = x0; cx <= x1; ++cx)
    for (long long cy = y0; cy <= y1; ++cy) {
      const auto it = cells_.find(key(cx, cy));
      if (it != cells_.end()) out.insert(out.end(), it->second.begin(), it->second.end());
    }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace traj_atlas
