#include "traj_atlas/cyra.hpp"

#include <cmath>

#include "traj_atlas/error.hpp"

namespace traj_atlas {

namespace {

struct LineFit {
  double intercept = 0.0;  // value at x = 0
  double slope = 0.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
  return {my - slope * mx, slope};
}

}  // namespace

VehicleState estimate_cyra_state(const Trajectory& observed, double fit_window_s) {
  if (observed.empty()) throw ValidationError("empty trajectory");
  const double t_end = observed.points.back().t;
  std::size_t first = observed.size() - 1;
  while (first > 0 && observed.points[first - 1].t >= t_end - fit_window_s - 1e-9) --first;
  if (observed.size() - first < 3) throw ValidationError("CYRA fit needs at least 3 points in the window");

  std::vector<double> tm, chord, dt, theta;
  for (std::size_t i = first; i + 1 < observed.size(); ++i) {
    const auto& a = observed.points[i];
    const auto& b = observed.points[i + 1];
    const Vec2 d = b.pos() - a.pos();
    tm.push_back(0.5 * (a.t + b.t) - t_end);
    dt.push_back(b.t - a.t);
    chord.push_back(norm(d));
    double h = std::atan2(d.y, d.x);
    if (!theta.empty()) h = theta.back() + wrap_angle(h - theta.back());
    theta.push_back(h);
  }
  const LineFit hf = fit_line(tm, theta);
  // A chord on a circular arc is shorter than the arc by sin(x)/x.
  std::vector<double> speed(tm.size());
  for (std::size_t i = 0; i < tm.size(); ++i) {
    const double half = 0.5 * hf.slope * dt[i];
    const double k = std::abs(half) > 1e-12 ? half / std::sin(half) : 1.0;
    speed[i] = chord[i] * k / dt[i];
  }
  const LineFit vf = fit_line(tm, speed);

  VehicleState s;
  s.x = observed.points.back().x;
  s.y = observed.points.back().y;
  s.heading = wrap_angle(hf.intercept);
  s.yaw_rate = hf.slope;
  s.speed = std::max(vf.intercept, 0.0);
  s.acceleration = vf.slope;
  return s;
}

CyraSample cyra_at(const VehicleState& s, double tau) {
  const double v0 = std::max(s.speed, 0.0);
  const double a = s.acceleration;
  const double w = s.yaw_rate;
  // after a stop, motion ends
  if (a < 0.0) tau = std::min(tau, v0 / -a);
  if (v0 == 0.0 && a <= 0.0) tau = 0.0;
  const double th0 = s.heading;
  const double th = th0 + w * tau;
  const double v = v0 + a * tau;
  Vec2 d;
  if (std::abs(w * tau) < 1e-3) {
    // Series in w; the closed form cancels catastrophically here.
    auto I = [&](int n) {
      return v0 * std::pow(tau, n + 1) / (n + 1) + a * std::pow(tau, n + 2) / (n + 2);
    };
    const double re = I(0) - w * w / 2.0 * I(2);
    const double im = w * I(1) - w * w * w / 6.0 * I(3);
    d = {re * std::cos(th0) - im * std::sin(th0), re * std::sin(th0) + im * std::cos(th0)};
  } else {
    d.x = (v * std::sin(th) - v0 * std::sin(th0)) / w + a * (std::cos(th) - std::cos(th0)) / (w * w);
    d.y = -(v * std::cos(th) - v0 * std::cos(th0)) / w + a * (std::sin(th) - std::sin(th0)) / (w * w);
  }
  return {Vec2{s.x, s.y} + d, wrap_angle(th), std::max(v, 0.0)};
}

Trajectory cyra_predict(const VehicleState& s, double horizon_m, double dt_s, double t0, double max_duration_s) {
  if (!(dt_s > 0.0)) throw ValidationError("dt_s must be > 0");
  Trajectory out;
  out.id = "cyra";
  out.points.push_back({t0, s.x, s.y});
  double arc = 0.0;
  for (long long k = 1; arc < horizon_m; ++k) {
    const double tau = static_cast<double>(k) * dt_s;
    if (tau > max_duration_s) break;
    const auto c = cyra_at(s, tau);
    const Vec2 prev = out.points.back().pos();
    const double step = distance(prev, c.pos);
    if (step == 0.0 && c.speed == 0.0 && s.acceleration <= 0.0) break;  // standing still for good
    arc += step;
    out.points.push_back({t0 + tau, c.pos.x, c.pos.y});
  }
  return out;
}

}  // namespace traj_atlas
