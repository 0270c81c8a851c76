#include <gtest/gtest.h>

#include <map>
#include <random>
#include <set>

#include "test_util.hpp"
#include "traj_atlas/error.hpp"
#include "traj_atlas/raster.hpp"

using namespace traj_atlas;
using namespace traj_atlas::test;

namespace {

GridGeometry unit_grid(int w, int h) {
  GridGeometry g;
  g.resolution = 1.0;
  g.width = w;
  g.height = h;
  return g;
}

// Pixels a polyline covers, found by walking it in 1 mm steps and rounding
// each point to its pixel. Exact for axis-aligned polylines on the lattice.
std::set<std::pair<int, int>> covered_pixels(const Trajectory& tr) {
  std::set<std::pair<int, int>> out;
  for (std::size_t i = 0; i + 1 < tr.size(); ++i) {
    const Vec2 a = tr.points[i].pos(), b = tr.points[i + 1].pos();
    const int n = std::max(1, static_cast<int>(distance(a, b) * 1000.0));
    for (int k = 0; k <= n; ++k) {
      const Vec2 p = a + (b - a) * (static_cast<double>(k) / n);
      out.insert({static_cast<int>(std::lround(p.x)), static_cast<int>(std::lround(p.y))});
    }
  }
  return out;
}

Trajectory manhattan_walk(std::mt19937_64& rng, const std::string& id, int w, int h) {
  std::uniform_int_distribution<int> cx(0, w - 1), cy(0, h - 1), coin(0, 1);
  Trajectory tr;
  tr.id = id;
  int x = cx(rng), y = cy(rng);
  double t = 0.0;
  tr.points.push_back({t, double(x), double(y)});
  for (int k = 0; k < 6; ++k) {
    if (coin(rng))
      x = cx(rng);
    else
      y = cy(rng);
    tr.points.push_back({t += 1.0, double(x), double(y)});
  }
  return tr;
}

RasterGrid random_grid(std::mt19937_64& rng, int w, int h, int max_value) {
  RasterGrid g(unit_grid(w, h));
  std::uniform_int_distribution<int> v(0, max_value);
  for (auto& x : g.values) x = static_cast<std::uint32_t>(v(rng));
  return g;
}

RasterGrid naive_filter(const RasterGrid& in, int r, bool take_min) {
  RasterGrid out(in.geom);
  for (int y = 0; y < in.geom.height; ++y)
    for (int x = 0; x < in.geom.width; ++x) {
      std::uint32_t best = in.at(x, y);
      for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx) {
          if (!in.geom.contains(x + dx, y + dy)) continue;
          const auto v = in.at(x + dx, y + dy);
          best = take_min ? std::min(best, v) : std::max(best, v);
        }
      out.at(x, y) = best;
    }
  return out;
}

}  // namespace

TEST(FitGrid, CoversAllPointsWithMargin) {
  const std::vector<Trajectory> trajs = {line("a", {-3.0, 2.0}, {7.0, 2.0}, 5.0), line("b", {0.0, -4.0}, {0.0, 9.0}, 5.0)};
  const auto g = fit_grid(trajs, 0.5, 1.0);
  for (const auto& tr : trajs)
    for (const auto& p : tr.points) {
      const Vec2 q = g.world_to_pixel(p.pos());
      EXPECT_GE(q.x, 1.0 / 0.5 - 1.0);
      EXPECT_GE(q.y, 1.0 / 0.5 - 1.0);
      EXPECT_LE(q.x, g.width - 1.0);
      EXPECT_LE(q.y, g.height - 1.0);
    }
}

TEST(Rasterize, CrossingLinesMeetInOneCell) {
  const auto geom = unit_grid(11, 11);
  const std::vector<Trajectory> trajs = {line("h", {0.0, 5.0}, {10.0, 5.0}, 1.0), line("v", {5.0, 0.0}, {5.0, 10.0}, 1.0)};
  const auto res = rasterize(trajs, geom);
  std::map<std::pair<int, int>, int> oracle;
  for (const auto& tr : trajs)
    for (const auto& px : covered_pixels(tr)) ++oracle[px];
  for (int r = 0; r < 11; ++r)
    for (int c = 0; c < 11; ++c) {
      const auto it = oracle.find({c, r});
      EXPECT_EQ(res.grid.at(c, r), it == oracle.end() ? 0u : static_cast<unsigned>(it->second)) << c << "," << r;
    }
  EXPECT_EQ(res.grid.at(5, 5), 2u);
  EXPECT_EQ(res.skipped_pixels, 0u);
}

TEST(Rasterize, RevisitCountsOncePerTrajectory) {
  Trajectory tr;
  tr.id = "loop";
  tr.points = {{0, 1, 1}, {1, 5, 1}, {2, 1, 1}, {3, 5, 1}};
  const auto res = rasterize(std::vector<Trajectory>{tr}, unit_grid(8, 3));
  for (int c = 1; c <= 5; ++c) EXPECT_EQ(res.grid.at(c, 1), 1u);
}

TEST(Rasterize, OutOfGridPixelsAreSkipped) {
  Trajectory tr;
  tr.id = "a";
  tr.points = {{0, -3, 1}, {1, 3, 1}};
  const auto res = rasterize(std::vector<Trajectory>{tr}, unit_grid(4, 3));
  EXPECT_EQ(res.skipped_pixels, 3u);
  for (int c = 0; c <= 3; ++c) EXPECT_EQ(res.grid.at(c, 1), 1u);
}

TEST(Rasterize, InvalidGeometryThrows) {
  EXPECT_THROW(rasterize(std::vector<Trajectory>{}, GridGeometry{}), ValidationError);
}

TEST(Morphology, OpeningRemovesIsolatedPixel) {
  RasterGrid g(unit_grid(9, 9));
  g.at(4, 4) = 7;
  const std::vector<MorphPass> open = {{MorphOp::Open, 1}};
  EXPECT_EQ(morphological_denoise(g, open), RasterGrid(g.geom));
}

TEST(Morphology, ClosingFillsOnePixelHole) {
  RasterGrid g(unit_grid(9, 9));
  for (auto& v : g.values) v = 3;
  g.at(4, 4) = 0;
  const std::vector<MorphPass> close = {{MorphOp::Close, 1}};
  EXPECT_EQ(morphological_denoise(g, close).at(4, 4), 3u);
}

TEST(Morphology, ThreePixelBandSurvivesOpenThenClose) {
  RasterGrid g(unit_grid(20, 9));
  for (int r = 3; r <= 5; ++r)
    for (int c = 0; c < 20; ++c) g.at(c, r) = 4;
  const std::vector<MorphPass> passes = {{MorphOp::Open, 1}, {MorphOp::Close, 1}};
  EXPECT_EQ(morphological_denoise(g, passes), g);
}

TEST(Morphology, MatchesNaiveMinMaxFilter) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const auto g = random_grid(rng, 17 + trial, 13, 9);
    for (int r = 1; r <= 3; ++r) {
      EXPECT_EQ(erode(g, r), naive_filter(g, r, true));
      EXPECT_EQ(dilate(g, r), naive_filter(g, r, false));
    }
  }
}

TEST(Morphology, ZeroRadiusRejected) {
  EXPECT_THROW(erode(RasterGrid(unit_grid(3, 3)), 0), ValidationError);
}

TEST(Binarize, MatchesPerPixelCountOracle) {
  std::mt19937_64 rng(11);
  const int w = 40, h = 30;
  std::vector<Trajectory> trajs;
  std::map<std::pair<int, int>, unsigned> count;
  for (int i = 0; i < 100; ++i) {
    trajs.push_back(manhattan_walk(rng, "t" + std::to_string(i), w, h));
    for (const auto& px : covered_pixels(trajs.back())) ++count[px];
  }
  const auto mask = binarize(rasterize(trajs, unit_grid(w, h)).grid, 2);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      const auto it = count.find({c, r});
      const bool want = it != count.end() && it->second >= 2;
      EXPECT_EQ(mask.at(c, r), want) << c << "," << r;
    }
  EXPECT_THROW(binarize(RasterGrid(unit_grid(2, 2)), 0), ValidationError);
}

TEST(Kernels, SerialAndParallelAgree) {
  ScenarioConfig sc;
  sc.count = 80;
  const auto trajs = scenario_trajectories(sc);
  const auto geom = fit_grid(trajs, 0.25, 5.0);
  const auto a = rasterize(trajs, geom), b = serial::rasterize(trajs, geom);
  ASSERT_EQ(a.grid, b.grid);
  EXPECT_EQ(a.skipped_pixels, b.skipped_pixels);
  const std::vector<MorphPass> passes = {{MorphOp::Open, 1}, {MorphOp::Close, 1}, {MorphOp::Open, 2}};
  const auto da = morphological_denoise(a.grid, passes), db = serial::morphological_denoise(b.grid, passes);
  ASSERT_EQ(da, db);
  const auto ba = binarize(da, 2), bb = serial::binarize(db, 2);
  ASSERT_EQ(ba, bb);
  EXPECT_EQ(thin(ba), serial::thin(bb));
}

TEST(Thin, BarBecomesCentreLine) {
  auto img = blank(24, 7);
  fill_rect(img, 2, 2, 21, 4);
  const auto sk = thin(img).image;
  std::size_t on_mid = 0;
  for (int r = 0; r < 7; ++r)
    for (int c = 0; c < 24; ++c)
      if (sk.at(c, r)) {
        EXPECT_EQ(r, 3);
        ++on_mid;
      }
  EXPECT_GE(on_mid, 16u);
  EXPECT_EQ(count_components(sk), 1u);
}

TEST(Thin, MatchesReferenceOnFixtures) {
  for (const auto& [name, img] : thinning_fixtures()) {
    const auto sk = thin(img).image;
    EXPECT_EQ(sk, reference_zhang_suen(img)) << name;
    EXPECT_EQ(sk, serial::thin(img).image) << name;
  }
}

TEST(Thin, FixtureProperties) {
  for (const auto& [name, img] : thinning_fixtures()) {
    const auto sk = thin(img).image;
    EXPECT_TRUE(is_subset(sk, img)) << name;
    EXPECT_FALSE(has_full_2x2(sk)) << name;
    EXPECT_EQ(thin(sk).image, sk) << name;
    EXPECT_EQ(count_components(sk), count_components(img)) << name;
  }
}

TEST(Skeleton, NeighborCount) {
  const auto img = picture({
      "###",
      ".#.",
      "...",
  });
  EXPECT_EQ(neighbor_count(img, 1, 1), 3);
  EXPECT_EQ(neighbor_count(img, 0, 2), 2);
  EXPECT_EQ(neighbor_count(img, 1, 0), 1);
}

TEST(Skeleton, StaircaseCornersRemoved) {
  const auto img = picture({
      "......",
      ".##...",
      "..##..",
      "...##.",
      "......",
  });
  const auto out = remove_staircases(Skeleton{img}).image;
  EXPECT_TRUE(is_subset(out, img));
  EXPECT_EQ(count_components(out), 1u);
  for (int r = 0; r < out.geom.height; ++r)
    for (int c = 0; c < out.geom.width; ++c)
      if (out.at(c, r)) EXPECT_LE(neighbor_count(out, c, r), 2);
}

TEST(Skeleton, PruneRemovesShortSpurKeepsLongArms) {
  // Long horizontal line with a 3 px stub pointing up from its middle.
  const auto img = picture({
      "..........#..........",
      "..........#..........",
      "..........#..........",
      "#####################",
  });
  const auto out = prune_spurs(Skeleton{img}, 4).image;
  for (int c = 0; c < 21; ++c) EXPECT_TRUE(out.at(c, 0)) << c;
  for (int r = 1; r < 4; ++r) EXPECT_FALSE(out.at(10, r));
}

TEST(Skeleton, PruneComb) {
  std::vector<std::string> rows = {
      "..#...#...#...#...#..",
      "..#...#...#...#...#..",
      "#####################",
      "..........#..........",
      "..........#..........",
      "..........#..........",
      "..........#..........",
      "..........#..........",
      "..........#..........",
  };
  const auto img = picture(rows);
  const auto out = prune_spurs(Skeleton{img}, 3).image;
  EXPECT_EQ(count_components(out), 1u);
  for (int c : {2, 6, 14, 18}) {
    EXPECT_FALSE(out.at(c, 7)) << c;
    EXPECT_FALSE(out.at(c, 8)) << c;
  }
  for (int r = 0; r < 6; ++r) EXPECT_TRUE(out.at(10, r)) << r;
}

TEST(Skeleton, PruneCombToBareSpine) {
  auto img = blank(34, 6);
  for (int c = 2; c < 32; ++c) img.set(c, 1, true);
  for (int c : {9, 16, 23}) {
    img.set(c, 2, true);
    img.set(c, 3, true);
  }
  auto spine = blank(34, 6);
  for (int c = 2; c < 32; ++c) spine.set(c, 1, true);
  EXPECT_EQ(prune_spurs(Skeleton{img}, 3).image, spine);
}

TEST(Skeleton, PrunedSkeletonsHaveNoShortSpurs) {
  for (const auto& [name, img] : thinning_fixtures()) {
    const auto sk = prune_spurs(remove_staircases(thin(img)), 8);
    EXPECT_EQ(prune_spurs(sk, 8), sk) << name;
    EXPECT_TRUE(is_subset(sk.image, img)) << name;
  }
}

TEST(Skeleton, CountComponentsUsesEightConnectivity) {
  const auto img = picture({
      "#.....",
      ".#..##",
      "......",
      "##....",
  });
  EXPECT_EQ(count_components(img), 3u);
}
