#include "traj_atlas/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "traj_atlas/error.hpp"

namespace traj_atlas {

using nlohmann::json;

namespace {

// Reads known keys from an object and reports the rest as errors.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ValidationError("config: '" + path_ + "' must be an object");
  }
  ~Section() noexcept(false) {
    if (std::uncaught_exceptions()) return;
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) throw ValidationError("config: unknown key '" + path_ + "." + k + "'");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ValidationError("config: '" + path_ + "." + key + "' has the wrong type");
    }
  }
  const json* child(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }
  const std::string& path() const { return path_; }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_profile(const json& j, const std::string& path, ManeuverProfile& p) {
  Section s(j, path);
  s.get("weight", p.weight);
  s.get("approach_speed_mps", p.approach_speed);
  s.get("turn_speed_mps", p.turn_speed);
}

json profile_json(const ManeuverProfile& p) {
  return {{"weight", p.weight}, {"approach_speed_mps", p.approach_speed}, {"turn_speed_mps", p.turn_speed}};
}

MorphOp parse_op(const std::string& s) {
  if (s == "open") return MorphOp::Open;
  if (s == "close") return MorphOp::Close;
  throw ValidationError("config: morphology op must be 'open' or 'close', got '" + s + "'");
}

}  // namespace

void apply_config(PipelineConfig& cfg, const json& j) {
  {
    Section root(j, "config");
    root.get("threads", cfg.threads);
    if (const auto* r = root.child("raster")) {
      Section s(*r, "raster");
      auto& b = cfg.build;
      s.get("min_trajectory_m", b.min_trajectory_m);
      s.get("max_gap_s", b.max_gap_s);
      s.get("resolution_m", b.resolution_m);
      s.get("margin_m", b.margin_m);
      s.get("threshold", b.threshold);
      s.get("max_spur_px", b.max_spur_px);
      if (const auto* m = s.child("morphology")) {
        if (!m->is_array()) throw ValidationError("config: 'raster.morphology' must be an array");
        b.morphology.clear();
        for (const auto& pass : *m) {
          Section ps(pass, "raster.morphology[]");
          std::string op;
          int radius = 0;
          ps.get("op", op);
          ps.get("radius_px", radius);
          b.morphology.push_back({parse_op(op), radius});
        }
      }
    }
    if (const auto* g = root.child("graph")) {
      Section s(*g, "graph");
      s.get("simplify_tolerance_m", cfg.build.simplify_tolerance_m);
      s.get("merge_junctions_m", cfg.build.merge_junctions_m);
    }
    if (const auto* m = root.child("match")) {
      Section s(*m, "match");
      s.get("max_snap_m", cfg.build.match.max_snap_m);
      s.get("max_gap_samples", cfg.build.match.max_gap_samples);
    }
    if (const auto* b = root.child("behavior")) {
      Section s(*b, "behavior");
      auto& bp = cfg.build.behavior;
      s.get("lookback_m", bp.lookback_m);
      s.get("eps_mps", bp.clustering.eps_mps);
      s.get("min_lns", bp.clustering.min_lns);
      s.get("merge_gap_mps", bp.clustering.merge_gap_mps);
      s.get("prototype_step_m", bp.prototype.step_m);
      s.get("prototype_min_lns", bp.prototype.min_lns);
    }
    if (const auto* p = root.child("predictor")) {
      Section s(*p, "predictor");
      s.get("heading_weight", cfg.predictor.heading_weight);
      s.get("speed_window_s", cfg.predictor.speed_window_s);
      s.get("min_segment_m", cfg.predictor.min_segment_m);
    }
    if (const auto* w = root.child("metrics")) {
      Section s(*w, "metrics");
      s.get("medt", cfg.eval.weights.medt);
      s.get("medp", cfg.eval.weights.medp);
      s.get("god", cfg.eval.weights.god);
      s.get("avd", cfg.eval.weights.avd);
    }
    if (const auto* e = root.child("eval")) {
      Section s(*e, "eval");
      s.get("horizons_m", cfg.eval.horizons_m);
      s.get("split", cfg.eval.split);
      s.get("split_ratio", cfg.eval.split_ratio);
      s.get("seed", cfg.eval.seed);
      s.get("prefix_s", cfg.eval.prefix_s);
      s.get("stride_s", cfg.eval.stride_s);
      s.get("cyra_fit_window_s", cfg.eval.cyra_fit_window_s);
      s.get("prediction_length_m", cfg.eval.prediction_length_m);
    }
    if (const auto* sc = root.child("scenario")) {
      Section s(*sc, "scenario");
      auto& c = cfg.scenario;
      s.get("arm_headings_deg", c.arm_headings_deg);
      s.get("lane_offset_m", c.lane_offset_m);
      s.get("box_half_m", c.box_half_m);
      s.get("arm_length_m", c.arm_length_m);
      if (const auto* p = s.child("straight")) read_profile(*p, "scenario.straight", c.straight);
      if (const auto* p = s.child("left")) read_profile(*p, "scenario.left", c.left);
      if (const auto* p = s.child("right")) read_profile(*p, "scenario.right", c.right);
      s.get("speed_sigma_mps", c.speed_sigma_mps);
      s.get("decel_distance_m", c.decel_distance_m);
      s.get("lateral_sigma_m", c.lateral_sigma_m);
      s.get("noise_sigma_m", c.noise_sigma_m);
      s.get("dt_s", c.dt_s);
      s.get("count", c.count);
      s.get("seed", c.seed);
    }
  }
  sync_shared(cfg);
  validate(cfg);
}

void sync_shared(PipelineConfig& cfg) {
  cfg.predictor.lookback_m = cfg.build.behavior.lookback_m;
  cfg.predictor.max_snap_m = cfg.build.match.max_snap_m;
  cfg.build.behavior.max_snap_m = cfg.build.match.max_snap_m;
}

void validate(const PipelineConfig& cfg) {
  const auto& b = cfg.build;
  if (cfg.threads < 0) throw ValidationError("threads must be >= 0");
  if (!(b.min_trajectory_m >= 0.0)) throw ValidationError("raster.min_trajectory_m must be >= 0");
  if (!(b.max_gap_s > 0.0)) throw ValidationError("raster.max_gap_s must be > 0");
  if (!(b.resolution_m > 0.0)) throw ValidationError("raster.resolution_m must be > 0");
  if (!(b.margin_m >= 0.0)) throw ValidationError("raster.margin_m must be >= 0");
  if (b.threshold < 1) throw ValidationError("raster.threshold must be >= 1");
  if (b.max_spur_px < 0) throw ValidationError("raster.max_spur_px must be >= 0");
  for (const auto& p : b.morphology)
    if (p.radius_px < 0) throw ValidationError("raster.morphology radius_px must be >= 0");
  if (!(b.simplify_tolerance_m >= 0.0)) throw ValidationError("graph.simplify_tolerance_m must be >= 0");
  if (!(b.merge_junctions_m >= 0.0)) throw ValidationError("graph.merge_junctions_m must be >= 0");
  if (!(b.match.max_snap_m > 0.0)) throw ValidationError("match.max_snap_m must be > 0");
  if (b.match.max_gap_samples < 0) throw ValidationError("match.max_gap_samples must be >= 0");
  const auto& bp = b.behavior;
  if (!(bp.lookback_m > 0.0)) throw ValidationError("behavior.lookback_m must be > 0");
  if (!(bp.clustering.eps_mps > 0.0)) throw ValidationError("behavior.eps_mps must be > 0");
  if (bp.clustering.min_lns < 1) throw ValidationError("behavior.min_lns must be >= 1");
  if (!(bp.clustering.merge_gap_mps >= 0.0)) throw ValidationError("behavior.merge_gap_mps must be >= 0");
  if (!(bp.prototype.step_m > 0.0)) throw ValidationError("behavior.prototype_step_m must be > 0");
  if (bp.prototype.min_lns < 1) throw ValidationError("behavior.prototype_min_lns must be >= 1");
  if (!(cfg.predictor.heading_weight >= 0.0)) throw ValidationError("predictor.heading_weight must be >= 0");
  if (!(cfg.predictor.speed_window_s > 0.0)) throw ValidationError("predictor.speed_window_s must be > 0");
  if (!(cfg.predictor.min_segment_m > 0.0)) throw ValidationError("predictor.min_segment_m must be > 0");
  validate(cfg.eval);
  validate(cfg.scenario);
}

PipelineConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  PipelineConfig cfg;
  apply_config(cfg, j);
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

json config_to_json(const PipelineConfig& cfg) {
  const auto& b = cfg.build;
  json morph = json::array();
  for (const auto& p : b.morphology)
    morph.push_back({{"op", p.op == MorphOp::Open ? "open" : "close"}, {"radius_px", p.radius_px}});
  const auto& c = cfg.scenario;
  return {
      {"threads", cfg.threads},
      {"raster",
       {{"min_trajectory_m", b.min_trajectory_m},
        {"max_gap_s", b.max_gap_s},
        {"resolution_m", b.resolution_m},
        {"margin_m", b.margin_m},
        {"threshold", b.threshold},
        {"max_spur_px", b.max_spur_px},
        {"morphology", morph}}},
      {"graph", {{"simplify_tolerance_m", b.simplify_tolerance_m}, {"merge_junctions_m", b.merge_junctions_m}}},
      {"match", {{"max_snap_m", b.match.max_snap_m}, {"max_gap_samples", b.match.max_gap_samples}}},
      {"behavior",
       {{"lookback_m", b.behavior.lookback_m},
        {"eps_mps", b.behavior.clustering.eps_mps},
        {"min_lns", b.behavior.clustering.min_lns},
        {"merge_gap_mps", b.behavior.clustering.merge_gap_mps},
        {"prototype_step_m", b.behavior.prototype.step_m},
        {"prototype_min_lns", b.behavior.prototype.min_lns}}},
      {"predictor",
       {{"heading_weight", cfg.predictor.heading_weight},
        {"speed_window_s", cfg.predictor.speed_window_s},
        {"min_segment_m", cfg.predictor.min_segment_m}}},
      {"metrics",
       {{"medt", cfg.eval.weights.medt},
        {"medp", cfg.eval.weights.medp},
        {"god", cfg.eval.weights.god},
        {"avd", cfg.eval.weights.avd}}},
      {"eval",
       {{"horizons_m", cfg.eval.horizons_m},
        {"split", cfg.eval.split},
        {"split_ratio", cfg.eval.split_ratio},
        {"seed", cfg.eval.seed},
        {"prefix_s", cfg.eval.prefix_s},
        {"stride_s", cfg.eval.stride_s},
        {"cyra_fit_window_s", cfg.eval.cyra_fit_window_s},
        {"prediction_length_m", cfg.eval.prediction_length_m}}},
      {"scenario",
       {{"arm_headings_deg", c.arm_headings_deg},
        {"lane_offset_m", c.lane_offset_m},
        {"box_half_m", c.box_half_m},
        {"arm_length_m", c.arm_length_m},
        {"straight", profile_json(c.straight)},
        {"left", profile_json(c.left)},
        {"right", profile_json(c.right)},
        {"speed_sigma_mps", c.speed_sigma_mps},
        {"decel_distance_m", c.decel_distance_m},
        {"lateral_sigma_m", c.lateral_sigma_m},
        {"noise_sigma_m", c.noise_sigma_m},
        {"dt_s", c.dt_s},
        {"count", c.count},
        {"seed", c.seed}}},
  };
}

}  // namespace traj_atlas
