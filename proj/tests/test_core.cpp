#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "test_util.hpp"
#include "traj_atlas/error.hpp"
#include "traj_atlas/geometry.hpp"
#include "traj_atlas/trajectory.hpp"

using namespace traj_atlas;

TEST(Geometry, WrapAngleRange) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (int i = 0; i < 1000; ++i) {
    const double a = u(rng);
    const double w = wrap_angle(a);
    EXPECT_GT(w, -std::numbers::pi);
    EXPECT_LE(w, std::numbers::pi);
    EXPECT_NEAR(std::remainder(a - w, 2.0 * std::numbers::pi), 0.0, 1e-9);
  }
  EXPECT_DOUBLE_EQ(wrap_angle(-std::numbers::pi), std::numbers::pi);
}

TEST(Geometry, PolylineProjectionMatchesDenseSampling) {
  const std::vector<Vec2> line = {{0, 0}, {4, 0}, {4, 3}, {9, 8}};
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 10.0);
  const auto cum = cumulative_arc(line);
  for (int i = 0; i < 200; ++i) {
    const Vec2 p{u(rng), u(rng)};
    double best = 1e18;
    for (double s = 0.0; s <= cum.back(); s += 1e-3) best = std::min(best, distance(p, point_at_arc(line, cum, s)));
    const auto proj = project_onto_polyline(p, line);
    EXPECT_NEAR(proj.dist, best, 2e-3);
    EXPECT_NEAR(distance(point_at_arc(line, cum, proj.arc), proj.point), 0.0, 1e-9);
  }
}

TEST(Geometry, SimplifyKeepsEveryPointWithinTolerance) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(0.0, 0.4);
  std::vector<Vec2> raw;
  for (int i = 0; i < 300; ++i) raw.push_back({i * 0.25, 3.0 * std::sin(i * 0.05) + n(rng)});
  for (double tol : {0.1, 0.3, 1.0}) {
    const auto s = simplify_polyline(raw, tol);
    EXPECT_EQ(s.front(), raw.front());
    EXPECT_EQ(s.back(), raw.back());
    for (const auto& p : raw) EXPECT_LE(project_onto_polyline(p, s).dist, tol + 1e-12);
  }
}

TEST(Geometry, SimplifyCollinearChainToTwoPoints) {
  std::vector<Vec2> raw;
  for (int i = 0; i < 20; ++i) raw.push_back({static_cast<double>(i), 2.0 * i});
  const auto s = simplify_polyline(raw, 0.3);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0], raw.front());
  EXPECT_EQ(s[1], raw.back());
}

TEST(Geometry, SegmentIndexFindsEveryOwnerInRange) {
  SegmentIndex idx(2.0);
  std::vector<std::vector<Vec2>> lines;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 40.0);
  for (std::size_t k = 0; k < 30; ++k) {
    std::vector<Vec2> l = {{u(rng), u(rng)}, {u(rng), u(rng)}};
    idx.insert(k, l);
    lines.push_back(l);
  }
  for (int i = 0; i < 100; ++i) {
    const Vec2 p{u(rng), u(rng)};
    const auto got = idx.owners_near(p, 3.0);
    for (std::size_t k = 0; k < lines.size(); ++k)
      if (project_onto_polyline(p, lines[k]).dist <= 3.0)
        EXPECT_TRUE(std::binary_search(got.begin(), got.end(), k)) << "owner " << k;
  }
}

// --- CSV ---------------------------------------------------------------------

TEST(TrajectoryCsv, GroupsRowsById) {
  std::istringstream in(
      "trajectory_id,t_s,x_m,y_m\n"
      "a,0,0,0\nb,0,1,1\na,1,1,0\nb,1,2,1\na,2,2,0\nb,2,3,1\n");
  const auto trs = parse_trajectories(in);
  ASSERT_EQ(trs.size(), 2u);
  EXPECT_EQ(trs[0].id, "a");
  EXPECT_EQ(trs[1].id, "b");
  EXPECT_EQ(trs[0].size(), 3u);
  EXPECT_EQ(trs[1].size(), 3u);
  EXPECT_EQ(trs[1].points[2].x, 3.0);
}

TEST(TrajectoryCsv, HeaderOnlyIsEmpty) {
  std::istringstream in("trajectory_id,t_s,x_m,y_m\n");
  EXPECT_TRUE(parse_trajectories(in).empty());
}

TEST(TrajectoryCsv, OutOfOrderTimeNamesTrajectory) {
  std::istringstream in("trajectory_id,t_s,x_m,y_m\nok,0,0,0\nbad,1,0,0\nbad,0.5,1,0\n");
  try {
    parse_trajectories(in);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("'bad'"), std::string::npos);
  }
}

TEST(TrajectoryCsv, DuplicateTimestampRejected) {
  std::istringstream in("trajectory_id,t_s,x_m,y_m\na,0,0,0\na,0,1,0\n");
  EXPECT_THROW(parse_trajectories(in), ValidationError);
}

TEST(TrajectoryCsv, MalformedRowReportsLine) {
  std::istringstream in("trajectory_id,t_s,x_m,y_m\na,0,0,0\na,1,zz,0\n");
  try {
    parse_trajectories(in);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(TrajectoryCsv, RoundTripIsBitExact) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-1e4, 1e4);
  std::vector<Trajectory> trs(3);
  for (std::size_t k = 0; k < trs.size(); ++k) {
    trs[k].id = "t" + std::to_string(k);
    double t = u(rng);
    for (int i = 0; i < 50; ++i) {
      t += 0.1 + std::abs(u(rng)) * 1e-6;
      trs[k].points.push_back({t, u(rng), u(rng) * 1e-7});
    }
  }
  std::stringstream buf;
  write_trajectories(buf, trs);
  const auto back = parse_trajectories(buf);
  ASSERT_EQ(back.size(), trs.size());
  for (std::size_t k = 0; k < trs.size(); ++k) EXPECT_EQ(back[k].points, trs[k].points);
}

// --- kinematics ----------------------------------------------------------------

TEST(Kinematics, ForwardDifference) {
  Trajectory tr{"a", {{0, 0, 0}, {1, 10, 0}}, {}, {}};
  const auto k = derive_kinematics(tr);
  EXPECT_DOUBLE_EQ(k.speed[0], 10.0);
  EXPECT_DOUBLE_EQ(k.speed[1], 10.0);
  EXPECT_DOUBLE_EQ(k.heading[0], 0.0);
}

TEST(Kinematics, StationaryKeepsPreviousHeading) {
  Trajectory tr{"a", {{0, 0, 0}, {1, 0, 1}, {2, 0, 1}, {3, 0, 1}}, {}, {}};
  const auto k = derive_kinematics(tr);
  EXPECT_DOUBLE_EQ(k.speed[1], 0.0);
  EXPECT_DOUBLE_EQ(k.heading[1], std::numbers::pi / 2);
  EXPECT_DOUBLE_EQ(k.heading[2], std::numbers::pi / 2);

  Trajectory still{"s", {{0, 3, 3}, {1, 3, 3}}, {}, {}};
  EXPECT_DOUBLE_EQ(derive_kinematics(still).heading[0], 0.0);
}

TEST(Kinematics, QuarterCircleSpeedWithinOnePercent) {
  const double r = 20.0, v = 5.0;
  const double t_end = (std::numbers::pi / 2) * r / v;
  const auto tr = test::sample("c", 0.0, t_end, 0.1, [&](double t) {
    return Vec2{r * std::cos(v * t / r), r * std::sin(v * t / r)};
  });
  const auto k = derive_kinematics(tr);
  for (double s : k.speed) EXPECT_NEAR(s, v, 0.01 * v);
}

TEST(Kinematics, NonIncreasingTimeRejected) {
  Trajectory tr{"a", {{0, 0, 0}, {0, 1, 0}}, {}, {}};
  EXPECT_THROW(derive_kinematics(tr), ValidationError);
  Trajectory one{"b", {{0, 0, 0}}, {}, {}};
  EXPECT_THROW(derive_kinematics(one), ValidationError);
}

TEST(Kinematics, RandomWalkSpeedsFiniteAndNonNegative) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n(0.0, 1.0);
  Trajectory tr{"r", {}, {}, {}};
  Vec2 p;
  for (int i = 0; i < 500; ++i) {
    if (i % 7 != 0) p += Vec2{n(rng), n(rng)};
    tr.points.push_back({i * 0.1, p.x, p.y});
  }
  const auto k = derive_kinematics(tr);
  for (std::size_t i = 0; i < k.size(); ++i) {
    EXPECT_GE(k.speed[i], 0.0);
    EXPECT_TRUE(std::isfinite(k.heading[i]));
    EXPECT_GT(k.heading[i], -std::numbers::pi);
    EXPECT_LE(k.heading[i], std::numbers::pi);
  }
}

// --- split / trim ----------------------------------------------------------------

TEST(SplitTrim, ContinuousTrackUnchanged) {
  const auto tr = test::line("a", {0, 0}, {30, 0}, 10.0);
  const auto out = split_and_trim(tr, 4.0);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].points, tr.points);
  EXPECT_EQ(out[0].id, "a");
}

TEST(SplitTrim, ShortTrackDropped) {
  EXPECT_TRUE(split_and_trim(test::line("a", {0, 0}, {3, 0}, 1.0), 4.0).empty());
}

TEST(SplitTrim, GapSplitsIntoTwoHalves) {
  Trajectory tr{"g", {}, {}, {}};
  for (int i = 0; i <= 10; ++i) tr.points.push_back({i * 0.1, i * 1.0, 0});
  for (int i = 0; i <= 10; ++i) tr.points.push_back({6.0 + i * 0.1, 10.0 + i * 1.0, 0});
  const auto out = split_and_trim(tr, 4.0, 1.0);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_DOUBLE_EQ(path_length(out[0]), 10.0);
  EXPECT_DOUBLE_EQ(path_length(out[1]), 10.0);
  EXPECT_EQ(out[0].id, "g#0");
  EXPECT_EQ(out[1].id, "g#1");
}

TEST(SplitTrim, OutputSatisfiesConstraints) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> dt(0.05, 1.6), step(0.0, 2.0);
  for (int rep = 0; rep < 20; ++rep) {
    Trajectory tr{"r", {}, {}, {}};
    double t = 0.0, x = 0.0;
    for (int i = 0; i < 200; ++i) {
      tr.points.push_back({t, x, 0.0});
      t += dt(rng);
      x += step(rng);
    }
    for (const auto& piece : split_and_trim(tr, 4.0, 1.0)) {
      EXPECT_GE(path_length(piece), 4.0);
      for (std::size_t i = 1; i < piece.size(); ++i) EXPECT_LE(piece.points[i].t - piece.points[i - 1].t, 1.0);
    }
  }
}

TEST(TrajectoryHelpers, TruncateAtArcInterpolates) {
  const auto tr = test::line("a", {0, 0}, {10, 0}, 1.0, 1.0);
  const auto cut = truncate_at_arc(tr, 2.5);
  EXPECT_DOUBLE_EQ(path_length(cut), 2.5);
  EXPECT_DOUBLE_EQ(cut.points.back().t, 2.5);
  EXPECT_EQ(position_at_time(tr, 3.25), (Vec2{3.25, 0}));
  EXPECT_EQ(position_at_time(tr, -1.0), (Vec2{0, 0}));
}
