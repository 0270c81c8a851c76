// traj_atlas command line: build-map, predict, evaluate, synth.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <omp.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "traj_atlas/config.hpp"
#include "traj_atlas/error.hpp"
#include "traj_atlas/evaluation.hpp"
#include "traj_atlas/pipeline.hpp"
#include "traj_atlas/predictor.hpp"
#include "traj_atlas/raster.hpp"
#include "traj_atlas/scenario.hpp"

using namespace traj_atlas;

namespace {

enum Exit : int {
  kOk = 0,
  kUsage = 1,
  kConfig = 2,    // validation of config or inputs
  kParseIo = 3,   // unreadable or malformed files
  kPipeline = 4,  // any other stage failure
  kPartial = 5,   // predict: some observed trajectories had no map coverage
};

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("traj_atlas");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* lvl = std::getenv("TRAJ_ATLAS_LOG")) spdlog::set_level(spdlog::level::from_str(lvl));
}

PipelineConfig config_from(const std::string& path) {
  PipelineConfig cfg = path.empty() ? PipelineConfig{} : load_config(path);
  sync_shared(cfg);
  return cfg;
}

void set_threads(int n) {
  if (n > 0) omp_set_num_threads(n);
}

int cmd_build_map(const std::string& traj_path, const std::string& cfg_path, const std::string& out,
                  const std::string& dump_dir, const std::string& matches_out, std::optional<int> threads) {
  PipelineConfig cfg = config_from(cfg_path);
  if (threads) cfg.threads = *threads;
  validate(cfg);
  set_threads(cfg.threads);
  const auto trajs = load_trajectories(traj_path);
  if (trajs.empty()) throw ValidationError("no trajectories");
  const auto res = build_behavior_map(trajs, cfg.build);
  save_behavior_map(out, res.map);
  if (!dump_dir.empty()) {
    std::filesystem::create_directories(dump_dir);
    write_pgm(std::filesystem::path(dump_dir) / "density.pgm", res.density);
    write_pbm(std::filesystem::path(dump_dir) / "skeleton.pbm", res.skeleton.image);
  }
  if (!matches_out.empty()) {
    std::ofstream f(matches_out);
    if (!f) throw IoError("cannot write " + matches_out);
    write_matches(f, res.matches);
  }
  const auto& d = res.diag;
  std::cout << "trajectories=" << d.usable_trajectories << " nodes=" << res.map.graph.nodes().size()
            << " edges=" << res.map.graph.edges().size() << " decision=" << d.classes.decision
            << " crossover=" << d.classes.crossover << " unmatched=" << d.unmatched_ids.size()
            << " pruned_edges=" << d.prune.removed_edges << '\n';
  for (const auto& id : d.unmatched_ids) spdlog::info("unmatched trajectory {}", id);
  return kOk;
}

int cmd_predict(const std::string& map_path, const std::string& observed_path, double horizon,
                const std::string& cfg_path, const std::string& out) {
  PipelineConfig cfg = config_from(cfg_path);
  validate(cfg);
  if (!(horizon > 0.0)) throw ValidationError("--horizon-m must be > 0");
  const BehaviorMap map = load_behavior_map(map_path);
  const Predictor predictor(map, cfg.predictor);
  const auto observed = load_trajectories(observed_path);
  if (observed.empty()) throw ValidationError("no observed trajectories");

  nlohmann::json doc = nlohmann::json::array();
  std::size_t failed = 0;
  for (const auto& o : observed) {
    nlohmann::json rec = {{"trajectory_id", o.id}};
    if (o.size() < 2) {
      rec["status"] = "too_short";
      ++failed;
    } else {
      const auto r = predictor.predict(o, horizon);
      rec["status"] = r.status == PredictStatus::Ok ? "ok" : "no_coverage";
      if (r.status != PredictStatus::Ok) {
        rec["message"] = r.message;
        ++failed;
      }
      rec["v_m"] = r.v_m;
      rec["start_edge"] = r.start_edge;
      rec["hypotheses"] = prediction_to_json(r);
    }
    doc.push_back(std::move(rec));
  }
  if (out.empty() || out == "-") {
    std::cout << doc.dump(1) << '\n';
  } else {
    std::ofstream f(out);
    if (!f) throw IoError("cannot write " + out);
    f << doc.dump(1) << '\n';
  }
  if (failed) spdlog::warn("{} of {} observed trajectories could not be predicted", failed, observed.size());
  return failed ? kPartial : kOk;
}

int cmd_evaluate(const std::string& traj_path, const std::string& cfg_path, const std::string& out_dir,
                 bool no_split, std::optional<std::uint64_t> seed, std::optional<int> threads) {
  PipelineConfig cfg = config_from(cfg_path);
  if (no_split) cfg.eval.split = false;
  if (seed) cfg.eval.seed = *seed;
  if (threads) cfg.threads = *threads;
  validate(cfg);
  set_threads(cfg.threads);
  const auto trajs = load_trajectories(traj_path);
  if (trajs.empty()) throw ValidationError("no trajectories");
  const auto ev = evaluate_split(trajs, cfg.build, cfg.predictor, cfg.eval);
  emit_report(ev.report, out_dir);
  const auto& r = ev.report;
  nlohmann::json summary = {{"train_trajectories", r.train_trajectories},
                            {"test_trajectories", r.test_trajectories},
                            {"cases", r.cases},
                            {"no_coverage", r.no_coverage},
                            {"path_cases", r.path_cases},
                            {"path_hits", r.path_hits},
                            {"path_choice_rate", r.path_choice_rate()}};
  std::ofstream f(std::filesystem::path(out_dir) / "summary.json");
  if (!f) throw IoError("cannot write summary.json");
  f << summary.dump(1) << '\n';
  write_report_csv(std::cout, r);
  return kOk;
}

int cmd_synth(const std::string& cfg_path, const std::string& out, std::optional<int> count,
              std::optional<std::uint64_t> seed) {
  PipelineConfig cfg = config_from(cfg_path);
  if (count) cfg.scenario.count = *count;
  if (seed) cfg.scenario.seed = *seed;
  validate(cfg);
  save_trajectories(out, scenario_trajectories(cfg.scenario));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Behavior maps and multi-hypothesis prediction from vehicle trajectories"};
  app.require_subcommand(1);
  app.fallthrough();
  std::optional<int> threads;
  app.add_option("--threads", threads, "Worker threads (0 = OpenMP default)")->check(CLI::NonNegativeNumber);

  std::string traj, cfg, out, dump_dir, matches_out, map, observed, out_dir;
  double horizon = 20.0;
  bool no_split = false;
  std::optional<std::uint64_t> seed;
  std::optional<int> count;

  auto* build = app.add_subcommand("build-map", "Build a behavior map from a trajectory CSV");
  build->add_option("--trajectories", traj, "Trajectory CSV (trajectory_id,t_s,x_m,y_m)")->required();
  build->add_option("--config", cfg, "JSON config");
  build->add_option("--out", out, "Output map JSON")->required();
  build->add_option("--dump-dir", dump_dir, "Write density.pgm and skeleton.pbm here");
  build->add_option("--matches", matches_out, "Write matched edge sequences (CSV) here");

  auto* predict = app.add_subcommand("predict", "Predict continuations of observed trajectories");
  predict->add_option("--map", map, "Behavior map JSON")->required();
  predict->add_option("--observed", observed, "Observed trajectory CSV")->required();
  predict->add_option("--horizon-m", horizon, "Prediction length in meters")->capture_default_str();
  predict->add_option("--config", cfg, "JSON config");
  predict->add_option("--out", out, "Output JSON (default stdout)");

  auto* evaluate = app.add_subcommand("evaluate", "Train/test evaluation against the CYRA baseline");
  evaluate->add_option("--trajectories", traj, "Trajectory CSV")->required();
  evaluate->add_option("--config", cfg, "JSON config");
  evaluate->add_option("--out-dir", out_dir, "Directory for report.csv and comparison.svg")->required();
  evaluate->add_flag("--no-split", no_split, "Evaluate on the training data itself");
  evaluate->add_option("--seed", seed, "Split seed (overrides config)");

  auto* synth = app.add_subcommand("synth", "Generate a synthetic intersection scenario CSV");
  synth->add_option("--config", cfg, "JSON config");
  synth->add_option("--out", out, "Output CSV")->required();
  synth->add_option("--count", count, "Number of trajectories (overrides config)")->check(CLI::NonNegativeNumber);
  synth->add_option("--seed", seed, "Scenario seed (overrides config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*build) return cmd_build_map(traj, cfg, out, dump_dir, matches_out, threads);
    if (*predict) return cmd_predict(map, observed, horizon, cfg, out);
    if (*evaluate) return cmd_evaluate(traj, cfg, out_dir, no_split, seed, threads);
    if (*synth) return cmd_synth(cfg, out, count, seed);
  } catch (const ValidationError& e) {
    spdlog::error("{}", e.what());
    return kConfig;
  } catch (const ParseError& e) {
    spdlog::error("{}", e.what());
    return kParseIo;
  } catch (const IoError& e) {
    spdlog::error("{}", e.what());
    return kParseIo;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kPipeline;
  }
  return kUsage;
}
