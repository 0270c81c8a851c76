#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "traj_atlas/evaluation.hpp"
#include "traj_atlas/pipeline.hpp"
#include "traj_atlas/predictor.hpp"
#include "traj_atlas/scenario.hpp"

namespace traj_atlas {

// Everything a run needs. Loaded from JSON; absent keys keep their defaults,
// unknown keys are rejected so typos cannot silently fall back to defaults.
struct PipelineConfig {
  MapBuildParams build;
  PredictorParams predictor;
  EvalOptions eval;
  ScenarioConfig scenario;
  int threads = 0;  // 0: OpenMP default
};

// Applies `j` on top of `cfg` and validates the result.
void apply_config(PipelineConfig& cfg, const nlohmann::json& j);
PipelineConfig load_config(const std::filesystem::path& path);
PipelineConfig parse_config(const std::string& text);

// Full config as JSON (every key, including defaults).
nlohmann::json config_to_json(const PipelineConfig& cfg);

// Copies settings that several modules share (snap distance, lookback) from
// their owning section. Call after changing fields by hand.
void sync_shared(PipelineConfig& cfg);

// Cross-module checks; throws ValidationError.
void validate(const PipelineConfig& cfg);

}  // namespace traj_atlas
