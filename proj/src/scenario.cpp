#include "traj_atlas/scenario.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "traj_atlas/error.hpp"

namespace traj_atlas {

std::string to_string(Maneuver m) {
  switch (m) {
    case Maneuver::Straight: return "straight";
    case Maneuver::Left: return "left";
    case Maneuver::Right: return "right";
  }
  return "?";
}

void validate(const ScenarioConfig& c) {
  if (c.arm_headings_deg.size() < 2) throw ValidationError("scenario needs at least 2 arms");
  if (!(c.lane_offset_m > 0.0) || !(c.box_half_m > c.lane_offset_m))
    throw ValidationError("scenario needs 0 < lane_offset_m < box_half_m");
  if (!(c.arm_length_m > 0.0)) throw ValidationError("arm_length_m must be > 0");
  for (const auto* p : {&c.straight, &c.left, &c.right}) {
    if (p->weight < 0.0) throw ValidationError("maneuver weights must be >= 0");
    if (!(p->approach_speed > 0.0) || !(p->turn_speed > 0.0)) throw ValidationError("maneuver speeds must be > 0");
  }
  if (c.straight.weight + c.left.weight + c.right.weight <= 0.0)
    throw ValidationError("maneuver weights must not all be zero");
  if (c.speed_sigma_mps < 0.0 || c.lateral_sigma_m < 0.0 || c.noise_sigma_m < 0.0)
    throw ValidationError("noise parameters must be >= 0");
  if (c.decel_distance_m < 0.0) throw ValidationError("decel_distance_m must be >= 0");
  if (!(c.dt_s > 0.0)) throw ValidationError("dt_s must be > 0");
  if (c.count < 0) throw ValidationError("count must be >= 0");
}

namespace {

constexpr double kPi = std::numbers::pi;

Vec2 right_normal(Vec2 d) { return {d.y, -d.x}; }

Vec2 arm_dir(const ScenarioConfig& c, std::size_t arm) {
  return unit_from_heading(c.arm_headings_deg[arm] * kPi / 180.0);
}

// Piecewise path: inbound straight, connector (line or arc), outbound straight.
struct Path {
  Vec2 in_start, in_dir;
  double in_len = 0.0;
  bool arc = false;
  Vec2 center;
  double radius = 0.0, a0 = 0.0, sweep = 0.0;  // connector arc
  Vec2 mid_start, mid_dir;
  double mid_len = 0.0;  // connector length
  Vec2 out_start, out_dir;
  double out_len = 0.0;

  double length() const { return in_len + mid_len + out_len; }

  void eval(double s, Vec2& p, Vec2& tangent) const {
    if (s <= in_len) {
      p = in_start + in_dir * s;
      tangent = in_dir;
      return;
    }
    s -= in_len;
    if (s <= mid_len) {
      if (!arc) {
        p = mid_start + mid_dir * s;
        tangent = mid_dir;
        return;
      }
      const double a = a0 + (sweep > 0 ? 1.0 : -1.0) * s / radius;
      p = center + Vec2{std::cos(a), std::sin(a)} * radius;
      tangent = sweep > 0 ? Vec2{-std::sin(a), std::cos(a)} : Vec2{std::sin(a), -std::cos(a)};
      return;
    }
    s = std::min(s - mid_len, out_len);
    p = out_start + out_dir * s;
    tangent = out_dir;
  }
};

Path make_path(const ScenarioConfig& c, std::size_t arm, Maneuver m) {
  const double R = c.box_half_m, w = c.lane_offset_m, L = c.arm_length_m;
  const Vec2 u = arm_dir(c, arm);
  const Vec2 d = u * -1.0;
  const Vec2 n_in = right_normal(d);
  const std::size_t ex = exit_arm(c, arm, m);
  const Vec2 um = arm_dir(c, ex);
  const Vec2 n_out = right_normal(um);

  Path path;
  path.in_start = u * (R + L) + n_in * w;
  path.in_dir = d;
  path.in_len = L;
  const Vec2 entry = u * R + n_in * w;
  const Vec2 exit = um * R + n_out * w;
  path.out_start = exit;
  path.out_dir = um;
  path.out_len = L;
  if (m == Maneuver::Straight) {
    path.mid_start = entry;
    path.mid_dir = d;
    path.mid_len = distance(entry, exit);
    return path;
  }
  path.arc = true;
  // Turn arc tangent to both lanes; centre on the inside of the turn.
  const bool right = m == Maneuver::Right;
  path.radius = right ? R - w : R + w;
  path.center = entry + n_in * (right ? path.radius : -path.radius);
  const Vec2 r0 = entry - path.center;
  const Vec2 r1 = exit - path.center;
  path.a0 = std::atan2(r0.y, r0.x);
  double sw = std::atan2(cross(r0, r1), dot(r0, r1));
  if (right && sw > 0) sw -= 2 * kPi;
  if (!right && sw < 0) sw += 2 * kPi;
  path.sweep = sw;
  path.mid_len = std::abs(sw) * path.radius;
  return path;
}

double speed_at(const Path& p, double s, double v_app, double v_turn, double ramp) {
  const double entry = p.in_len;
  const double exit = p.in_len + p.mid_len;
  if (s >= entry && s <= exit) return v_turn;
  const double gap = s < entry ? entry - s : s - exit;
  if (ramp <= 0.0 || gap >= ramp) return v_app;
  return v_turn + (v_app - v_turn) * gap / ramp;
}

}  // namespace

std::size_t exit_arm(const ScenarioConfig& c, std::size_t arm, Maneuver m) {
  const Vec2 d = arm_dir(c, arm) * -1.0;
  Vec2 want = d;
  if (m == Maneuver::Right) want = right_normal(d);
  if (m == Maneuver::Left) want = right_normal(d) * -1.0;
  std::size_t best = 0;
  double best_dot = -2.0;
  for (std::size_t k = 0; k < c.arm_headings_deg.size(); ++k) {
    if (k == arm) continue;
    const double dd = dot(arm_dir(c, k), want);
    if (dd > best_dot) {
      best_dot = dd;
      best = k;
    }
  }
  return best;
}

std::vector<Vec2> maneuver_centerline(const ScenarioConfig& c, std::size_t arm, Maneuver m, double step_m) {
  const Path path = make_path(c, arm, m);
  std::vector<Vec2> out;
  Vec2 p, t;
  for (double s = 0.0; s < path.length(); s += step_m) {
    path.eval(s, p, t);
    out.push_back(p);
  }
  path.eval(path.length(), p, t);
  out.push_back(p);
  return out;
}

std::vector<ScenarioTrajectory> generate_scenario(const ScenarioConfig& c) {
  validate(c);
  std::mt19937_64 rng(c.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double wsum = c.straight.weight + c.left.weight + c.right.weight;
  const std::size_t arms = c.arm_headings_deg.size();

  std::vector<ScenarioTrajectory> out;
  out.reserve(static_cast<std::size_t>(c.count));
  for (int i = 0; i < c.count; ++i) {
    ScenarioTrajectory st;
    st.entry_arm = static_cast<std::size_t>(unit(rng) * static_cast<double>(arms)) % arms;
    const double pick = unit(rng) * wsum;
    const ManeuverProfile* prof = &c.straight;
    st.maneuver = Maneuver::Straight;
    if (pick >= c.straight.weight) {
      st.maneuver = pick < c.straight.weight + c.left.weight ? Maneuver::Left : Maneuver::Right;
      prof = st.maneuver == Maneuver::Left ? &c.left : &c.right;
    }
    const double dv = c.speed_sigma_mps * gauss(rng);
    const double v_app = std::max(prof->approach_speed + dv, 0.5);
    const double v_turn = std::max(prof->turn_speed + dv, 0.5);
    const double lateral = c.lateral_sigma_m * gauss(rng);

    const Path path = make_path(c, st.entry_arm, st.maneuver);
    Trajectory& tr = st.trajectory;
    tr.id = "v" + std::to_string(i);
    double s = 0.0, t = 0.0;
    while (true) {
      Vec2 p, tan;
      path.eval(s, p, tan);
      const Vec2 q = p + right_normal(tan) * lateral;
      tr.points.push_back({t, q.x + c.noise_sigma_m * gauss(rng), q.y + c.noise_sigma_m * gauss(rng)});
      if (s >= path.length()) break;
      s = std::min(s + speed_at(path, s, v_app, v_turn, c.decel_distance_m) * c.dt_s, path.length());
      t = static_cast<double>(tr.points.size()) * c.dt_s;
    }
    out.push_back(std::move(st));
  }
  return out;
}

std::vector<Trajectory> scenario_trajectories(const ScenarioConfig& c) {
  std::vector<Trajectory> out;
  for (auto& st : generate_scenario(c)) out.push_back(std::move(st.trajectory));
  return out;
}

}  // namespace traj_atlas
