#include "traj_atlas/trajectory.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

#include "traj_atlas/error.hpp"

namespace traj_atlas {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_double(std::string_view field, std::size_t line) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(v))
    throw ParseError("invalid number '" + std::string(field) + "'", line);
  return v;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

std::vector<Trajectory> parse_trajectories(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) return {};
  ++line_no;
  if (trim(line) != "trajectory_id,t_s,x_m,y_m")
    throw ParseError("expected header 'trajectory_id,t_s,x_m,y_m'", line_no);

  std::vector<Trajectory> out;
  std::map<std::string, std::size_t, std::less<>> index;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view row = trim(line);
    if (row.empty()) continue;
    std::string_view fields[4];
    std::size_t n = 0, start = 0;
    for (std::size_t i = 0; i <= row.size(); ++i) {
      if (i == row.size() || row[i] == ',') {
        if (n == 4) throw ParseError("too many fields", line_no);
        fields[n++] = row.substr(start, i - start);
        start = i + 1;
      }
    }
    if (n != 4) throw ParseError("expected 4 fields", line_no);
    const std::string id(trim(fields[0]));
    if (id.empty()) throw ParseError("empty trajectory_id", line_no);
    TrajectoryPoint p{parse_double(fields[1], line_no), parse_double(fields[2], line_no),
                      parse_double(fields[3], line_no)};

    auto [it, inserted] = index.try_emplace(id, out.size());
    if (inserted) out.push_back(Trajectory{id, {}, {}, {}});
    auto& pts = out[it->second].points;
    if (!pts.empty()) {
      if (p.t == pts.back().t)
        throw ValidationError("duplicate timestamp " + format_double(p.t) + " in trajectory '" + id + "' (line " +
                              std::to_string(line_no) + ")");
      if (p.t < pts.back().t)
        throw ValidationError("non-monotone time in trajectory '" + id + "' (line " + std::to_string(line_no) + ")");
    }
    pts.push_back(p);
  }
  return out;
}

std::vector<Trajectory> load_trajectories(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return parse_trajectories(in);
}

void write_trajectories(std::ostream& out, std::span<const Trajectory> trajs) {
  out << "trajectory_id,t_s,x_m,y_m\n";
  for (const auto& tr : trajs)
    for (const auto& p : tr.points)
      out << tr.id << ',' << format_double(p.t) << ',' << format_double(p.x) << ',' << format_double(p.y) << '\n';
}

void save_trajectories(const std::filesystem::path& path, std::span<const Trajectory> trajs) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  write_trajectories(out, trajs);
  if (!out) throw IoError("write failed: " + path.string());
}

Trajectory derive_kinematics(Trajectory traj) {
  const std::size_t n = traj.points.size();
  if (n < 2) throw ValidationError("trajectory '" + traj.id + "' needs at least 2 points");
  traj.speed.assign(n, 0.0);
  traj.heading.assign(n, 0.0);
  double prev_heading = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const auto& a = traj.points[i];
    const auto& b = traj.points[i + 1];
    const double dt = b.t - a.t;
    if (!(dt > 0.0)) throw ValidationError("trajectory '" + traj.id + "' has non-increasing time");
    const Vec2 d = b.pos() - a.pos();
    const double len = norm(d);
    traj.speed[i] = len / dt;
    if (len > 0.0) prev_heading = wrap_angle(std::atan2(d.y, d.x));
    traj.heading[i] = prev_heading;
  }
  traj.speed[n - 1] = traj.speed[n - 2];
  traj.heading[n - 1] = traj.heading[n - 2];
  return traj;
}

std::vector<Trajectory> split_and_trim(const Trajectory& traj, double min_length_m, double max_gap_s) {
  if (!(min_length_m > 0.0)) throw ValidationError("min_length_m must be > 0");
  std::vector<std::pair<std::size_t, std::size_t>> pieces;
  std::size_t start = 0;
  for (std::size_t i = 1; i <= traj.points.size(); ++i) {
    if (i == traj.points.size() || traj.points[i].t - traj.points[i - 1].t > max_gap_s) {
      if (i > start) pieces.emplace_back(start, i - 1);
      start = i;
    }
  }
  std::vector<Trajectory> out;
  for (const auto& [first, last] : pieces) {
    if (last == first) continue;
    Trajectory piece = slice(traj, first, last);
    if (path_length(piece) < min_length_m) continue;
    if (pieces.size() > 1) piece.id = traj.id + "#" + std::to_string(out.size());
    out.push_back(std::move(piece));
  }
  return out;
}

std::vector<Vec2> positions(const Trajectory& traj) {
  std::vector<Vec2> out;
  out.reserve(traj.points.size());
  for (const auto& p : traj.points) out.push_back(p.pos());
  return out;
}

double path_length(const Trajectory& traj) {
  double s = 0.0;
  for (std::size_t i = 1; i < traj.points.size(); ++i)
    s += distance(traj.points[i - 1].pos(), traj.points[i].pos());
  return s;
}

Trajectory slice(const Trajectory& traj, std::size_t first, std::size_t last) {
  Trajectory out;
  out.id = traj.id;
  out.points.assign(traj.points.begin() + first, traj.points.begin() + last + 1);
  if (traj.has_kinematics()) {
    out.speed.assign(traj.speed.begin() + first, traj.speed.begin() + last + 1);
    out.heading.assign(traj.heading.begin() + first, traj.heading.begin() + last + 1);
  }
  return out;
}

Vec2 position_at_time(const Trajectory& traj, double t) {
  const auto& pts = traj.points;
  if (pts.empty()) return {};
  if (t <= pts.front().t) return pts.front().pos();
  if (t >= pts.back().t) return pts.back().pos();
  const auto it = std::upper_bound(pts.begin(), pts.end(), t,
                                   [](double v, const TrajectoryPoint& p) { return v < p.t; });
  const auto& b = *it;
  const auto& a = *(it - 1);
  const double u = (t - a.t) / (b.t - a.t);
  return a.pos() + (b.pos() - a.pos()) * u;
}

Trajectory truncate_at_arc(const Trajectory& traj, double s) {
  Trajectory out;
  out.id = traj.id;
  if (traj.points.empty()) return out;
  out.points.push_back(traj.points.front());
  double acc = 0.0;
  for (std::size_t i = 1; i < traj.points.size(); ++i) {
    const auto& a = traj.points[i - 1];
    const auto& b = traj.points[i];
    const double seg = distance(a.pos(), b.pos());
    if (acc + seg >= s) {
      const double u = seg > 0.0 ? (s - acc) / seg : 1.0;
      if (u <= 0.0) break;
      const Vec2 q = a.pos() + (b.pos() - a.pos()) * u;
      out.points.push_back({a.t + (b.t - a.t) * u, q.x, q.y});
      break;
    }
    acc += seg;
    out.points.push_back(b);
  }
  return out;
}

}  // namespace traj_atlas
