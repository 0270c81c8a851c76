#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "traj_atlas/config.hpp"
#include "traj_atlas/error.hpp"

using namespace traj_atlas;

TEST(Config, EmptyObjectKeepsDefaults) {
  const auto cfg = parse_config("{}");
  EXPECT_EQ(config_to_json(cfg), config_to_json(PipelineConfig{}));
}

TEST(Config, PartialSectionOverridesOnlyGivenKeys) {
  const auto cfg = parse_config(R"({"raster": {"resolution_m": 0.5}, "eval": {"horizons_m": [5, 10]}})");
  EXPECT_EQ(cfg.build.resolution_m, 0.5);
  EXPECT_EQ(cfg.build.threshold, MapBuildParams{}.threshold);
  EXPECT_EQ(cfg.eval.horizons_m, (std::vector<double>{5.0, 10.0}));
}

TEST(Config, RoundTrip) {
  PipelineConfig cfg;
  cfg.build.resolution_m = 0.3;
  cfg.build.morphology = {{MorphOp::Open, 2}, {MorphOp::Close, 1}};
  cfg.build.match.max_snap_m = 2.2;
  cfg.eval.seed = 99;
  cfg.eval.weights = {0.4, 0.4, 0.1, 0.1};
  cfg.scenario.left.weight = 0.7;
  cfg.threads = 3;
  sync_shared(cfg);
  const auto j = config_to_json(cfg);
  const auto back = parse_config(j.dump());
  EXPECT_EQ(config_to_json(back), j);
  EXPECT_EQ(back.build.morphology.size(), 2u);
  EXPECT_EQ(back.build.morphology[0].op, MorphOp::Open);
  EXPECT_EQ(back.eval.seed, 99u);
}

TEST(Config, UnknownKeysRejected) {
  EXPECT_THROW(parse_config(R"({"rastr": {}})"), ValidationError);
  EXPECT_THROW(parse_config(R"({"raster": {"resolution": 0.25}})"), ValidationError);
  EXPECT_THROW(parse_config(R"({"scenario": {"left": {"speed": 3}}})"), ValidationError);
  EXPECT_THROW(parse_config(R"({"raster": {"morphology": [{"op": "open", "radius": 1}]}})"), ValidationError);
}

TEST(Config, WrongTypesAndValues) {
  EXPECT_THROW(parse_config(R"({"raster": {"resolution_m": "fine"}})"), ValidationError);
  EXPECT_THROW(parse_config(R"({"raster": 3})"), ValidationError);
  EXPECT_THROW(parse_config(R"({"raster": {"morphology": {"op": "open"}}})"), ValidationError);
  EXPECT_THROW(parse_config(R"({"raster": {"morphology": [{"op": "dilate", "radius_px": 1}]}})"), ValidationError);
  EXPECT_THROW(parse_config(R"({"raster": {"resolution_m": 0}})"), ValidationError);
  EXPECT_THROW(parse_config(R"({"eval": {"split_ratio": 1.5}})"), ValidationError);
  EXPECT_THROW(parse_config(R"({"metrics": {"medt": -1}})"), ValidationError);
  EXPECT_THROW(parse_config(R"({"threads": -2})"), ValidationError);
}

TEST(Config, MalformedJsonIsParseError) { EXPECT_THROW(parse_config("{\"raster\": "), ParseError); }

TEST(Config, MissingFileIsIoError) { EXPECT_THROW(load_config("/nonexistent/traj_atlas.json"), IoError); }

TEST(Config, SharedSettingsFollowOwners) {
  const auto cfg = parse_config(R"({"match": {"max_snap_m": 1.7}, "behavior": {"lookback_m": 12}})");
  EXPECT_EQ(cfg.predictor.max_snap_m, 1.7);
  EXPECT_EQ(cfg.build.behavior.max_snap_m, 1.7);
  EXPECT_EQ(cfg.predictor.lookback_m, 12.0);
}
