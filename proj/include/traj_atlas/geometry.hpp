#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

namespace traj_atlas {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2& operator+=(Vec2 o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  bool operator==(const Vec2&) const = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }
inline Vec2 unit_from_heading(double heading) { return {std::cos(heading), std::sin(heading)}; }

// Wraps an angle into (-pi, pi].
double wrap_angle(double a);

struct SegmentProjection {
  Vec2 point;      // closest point on the segment
  double t = 0.0;  // parameter in [0, 1]
  double dist = 0.0;
};

SegmentProjection project_onto_segment(Vec2 p, Vec2 a, Vec2 b);

struct PolylineProjection {
  Vec2 point;
  std::size_t segment = 0;  // index of the segment holding `point`
  double t = 0.0;
  double dist = 0.0;
  double arc = 0.0;  // arc length from the polyline start to `point`
};

// Closest point on a polyline (>= 1 point). Ties resolve to the earliest segment.
PolylineProjection project_onto_polyline(Vec2 p, std::span<const Vec2> line);

double arc_length(std::span<const Vec2> line);

// Cumulative arc length, same size as `line`, starting at 0.
std::vector<double> cumulative_arc(std::span<const Vec2> line);

// Unit direction of segment `segment`; zero-length segments fall back to the
// nearest non-degenerate neighbour, or (1, 0) if the whole line is a point.
Vec2 segment_direction(std::span<const Vec2> line, std::size_t segment);

// Point at arc length `s` (clamped to [0, length]).
Vec2 point_at_arc(std::span<const Vec2> line, std::span<const double> cum, double s);

// Douglas-Peucker simplification keeping both endpoints; every input point
// stays within `tolerance` of the output polyline.
std::vector<Vec2> simplify_polyline(std::span<const Vec2> line, double tolerance);

// Uniform-grid bucket index over polyline segments for radius queries.
class SegmentIndex {
 public:
  struct Entry {
    std::size_t owner;    // caller-defined polyline id
    std::size_t segment;  // segment index within that polyline
  };

  explicit SegmentIndex(double cell_size);

  void insert(std::size_t owner, std::span<const Vec2> line);

  // Owners whose bounding cells intersect the square of half-width `radius`
  // around `p`. Sorted, unique.
  std::vector<std::size_t> owners_near(Vec2 p, double radius) const;

 private:
  static std::uint64_t key(long long cx, long long cy) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(cx)) << 32) |
           static_cast<std::uint32_t>(cy);
  }
  double cell_;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> cells_;
};

}  // namespace traj_atlas
