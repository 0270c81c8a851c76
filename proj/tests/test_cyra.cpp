#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <numbers>

#include "test_util.hpp"
#include "traj_atlas/cyra.hpp"
#include "traj_atlas/error.hpp"

using namespace traj_atlas;
using namespace traj_atlas::test;

namespace {

// RK4 on x' = v cos th, y' = v sin th, th' = w, v' = a with v floored at 0.
std::array<double, 4> rk4(const VehicleState& s, double duration, double h) {
  std::array<double, 4> y = {s.x, s.y, s.heading, s.speed};
  auto f = [&](const std::array<double, 4>& q) {
    const double v = std::max(q[3], 0.0);
    const bool stopped = q[3] <= 0.0 && s.acceleration <= 0.0;
    return std::array<double, 4>{v * std::cos(q[2]), v * std::sin(q[2]), stopped ? 0.0 : s.yaw_rate,
                                 stopped ? 0.0 : s.acceleration};
  };
  const long n = std::lround(duration / h);
  for (long k = 0; k < n; ++k) {
    // Split the step at the stopping instant so the kink in v is not smeared.
    double left = h;
    while (left > 0.0) {
      double step = left;
      if (s.acceleration < 0.0 && y[3] > 0.0) step = std::min(step, y[3] / -s.acceleration);
      if (step <= 0.0) step = left;
      auto add = [&](const std::array<double, 4>& d, double c) {
        std::array<double, 4> r = y;
        for (int i = 0; i < 4; ++i) r[i] += c * d[i];
        return r;
      };
      const auto k1 = f(y);
      const auto k2 = f(add(k1, step / 2));
      const auto k3 = f(add(k2, step / 2));
      const auto k4 = f(add(k3, step));
      for (int i = 0; i < 4; ++i) y[i] += step / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
      if (std::abs(y[3]) < 1e-12) y[3] = 0.0;
      left -= step;
    }
  }
  return y;
}

VehicleState state(double v, double w, double a, double heading = 0.3) { return {3.0, -2.0, heading, v, w, a}; }

// Observed track sampled from the closed form itself.
Trajectory from_model(const VehicleState& s, double duration, double dt = 0.1) {
  Trajectory tr;
  tr.id = "m";
  const long n = std::lround(duration / dt);
  for (long k = 0; k <= n; ++k) {
    const auto c = cyra_at(s, k * dt);
    tr.points.push_back({k * dt, c.pos.x, c.pos.y});
  }
  return tr;
}

}  // namespace

TEST(CyraAt, MatchesFineIntegration) {
  for (double v : {0.0, 3.0, 12.0})
    for (double w : {0.0, 1e-5, 0.1, -0.4})
      for (double a : {-2.0, 0.0, 1.5}) {
        const auto s = state(v, w, a);
        for (double t : {0.5, 2.0, 5.0}) {
          const auto want = rk4(s, t, 1e-3);
          const auto got = cyra_at(s, t);
          EXPECT_NEAR(got.pos.x, want[0], 1e-6) << v << " " << w << " " << a << " t=" << t;
          EXPECT_NEAR(got.pos.y, want[1], 1e-6) << v << " " << w << " " << a << " t=" << t;
          EXPECT_NEAR(got.speed, std::max(want[3], 0.0), 1e-9);
        }
      }
}

TEST(CyraAt, StopsAndStays) {
  const auto s = state(4.0, 0.2, -2.0);
  const auto at_stop = cyra_at(s, 2.0);
  EXPECT_DOUBLE_EQ(at_stop.speed, 0.0);
  const auto later = cyra_at(s, 4.0);
  EXPECT_EQ(later.pos, at_stop.pos);
  EXPECT_DOUBLE_EQ(later.heading, at_stop.heading);
}

TEST(CyraPredict, StraightConstantSpeed) {
  const auto out = cyra_predict(state(10.0, 0.0, 0.0, 0.0), 50.0, 0.1);
  ASSERT_GE(out.size(), 51u);
  for (std::size_t k = 1; k < out.size(); ++k) {
    EXPECT_NEAR(distance(out.points[k].pos(), out.points[k - 1].pos()), 1.0, 1e-9);
    EXPECT_NEAR(out.points[k].y, -2.0, 1e-12);
  }
}

TEST(CyraPredict, ZeroYawRateIsCollinear) {
  const auto out = cyra_predict(state(6.0, 0.0, 0.8, 1.1), 40.0, 0.1);
  const Vec2 u = unit_from_heading(1.1);
  const Vec2 o = out.points.front().pos();
  for (const auto& p : out.points) EXPECT_NEAR(cross(u, p.pos() - o), 0.0, 1e-9);
}

TEST(CyraPredict, ConstantSpeedWithoutAcceleration) {
  const auto out = cyra_predict(state(7.0, 0.3, 0.0), 30.0, 0.05);
  // Chord of an arc of length v*dt on radius v/w.
  const double r = 7.0 / 0.3;
  const double chord = 2.0 * r * std::sin(0.3 * 0.05 / 2.0);
  for (std::size_t k = 1; k < out.size(); ++k)
    EXPECT_NEAR(distance(out.points[k].pos(), out.points[k - 1].pos()), chord, 1e-9);
}

TEST(CyraPredict, CircleRadius) {
  const VehicleState s{0.0, 0.0, 0.0, 5.0, 0.1, 0.0};
  const auto out = cyra_predict(s, 100.0, 0.1);
  const Vec2 centre{0.0, 50.0};
  for (const auto& p : out.points) EXPECT_NEAR(distance(p.pos(), centre), 50.0, 1e-6);
  EXPECT_GE(path_length(out), 100.0);
  EXPECT_LT(path_length(out) - distance(out.points[out.size() - 2].pos(), out.points.back().pos()), 100.0);
}

TEST(CyraPredict, StationaryAndStopping) {
  const auto still = cyra_predict(state(0.0, 0.0, 0.0), 20.0, 0.1);
  EXPECT_EQ(still.size(), 1u);
  const auto stop = cyra_predict(state(4.0, 0.0, -2.0), 20.0, 0.1);
  // Braking distance v^2 / 2|a| = 4 m.
  EXPECT_NEAR(path_length(stop), 4.0, 1e-9);
  EXPECT_LE(stop.points.back().t, 2.0 + 0.1 + 1e-9);
  EXPECT_THROW(cyra_predict(state(4.0, 0.0, 0.0), 20.0, 0.0), ValidationError);
}

TEST(CyraPredict, TimesStartAtOffset) {
  const auto out = cyra_predict(state(5.0, 0.0, 0.0), 5.0, 0.1, 12.5);
  EXPECT_DOUBLE_EQ(out.points.front().t, 12.5);
  EXPECT_NEAR(out.points[3].t, 12.8, 1e-12);
}

TEST(EstimateState, UniformStraight) {
  const auto tr = line("s", {0, 0}, {30, 30}, 8.0);
  const auto s = estimate_cyra_state(tr, 1.0);
  EXPECT_NEAR(s.yaw_rate, 0.0, 1e-9);
  EXPECT_NEAR(s.acceleration, 0.0, 1e-9);
  EXPECT_NEAR(s.speed, 8.0, 1e-9);
  EXPECT_NEAR(s.heading, std::numbers::pi / 4, 1e-9);
  EXPECT_EQ(s.x, tr.points.back().x);
}

TEST(EstimateState, RecoversTurnRate) {
  const auto truth = state(6.0, 0.1, 0.0);
  const auto s = estimate_cyra_state(from_model(truth, 3.0), 1.0);
  EXPECT_NEAR(s.yaw_rate, 0.1, 1e-3);
  EXPECT_NEAR(s.speed, 6.0, 1e-3);
  const auto end = cyra_at(truth, 3.0);
  EXPECT_NEAR(wrap_angle(s.heading - end.heading), 0.0, 1e-3);
}

TEST(EstimateState, RecoversAcceleration) {
  const auto truth = state(5.0, -0.2, 1.2);
  const auto s = estimate_cyra_state(from_model(truth, 2.0), 1.0);
  EXPECT_NEAR(s.acceleration, 1.2, 1e-2);
  EXPECT_NEAR(s.speed, 5.0 + 1.2 * 2.0, 1e-2);
  EXPECT_NEAR(s.yaw_rate, -0.2, 1e-3);
}

TEST(EstimateState, HeadingAcrossWrap) {
  // Heading passes through +-pi during the window.
  const auto s = estimate_cyra_state(from_model(state(6.0, 0.3, 0.0, std::numbers::pi - 0.15), 1.0), 1.0);
  EXPECT_NEAR(s.yaw_rate, 0.3, 1e-3);
}

TEST(EstimateState, TooFewPoints) {
  const auto tr = line("s", {0, 0}, {1, 0}, 10.0);
  ASSERT_EQ(tr.size(), 2u);
  EXPECT_THROW(estimate_cyra_state(tr, 1.0), ValidationError);
  EXPECT_THROW(estimate_cyra_state(Trajectory{}, 1.0), ValidationError);
}
