#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "traj_atlas/behavior.hpp"
#include "traj_atlas/evaluation.hpp"
#include "traj_atlas/scenario.hpp"
#include "traj_atlas/trajectory.hpp"

using namespace traj_atlas;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code = -1;
  std::string output;  // stdout and stderr
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = fs::temp_directory_path() / "traj_atlas_cli_test";
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    // T-junction: the four-arm scenario without anything touching arm 3.
    ScenarioConfig sc;
    sc.count = 260;
    std::vector<Trajectory> tee;
    for (auto& s : generate_scenario(sc))
      if (s.entry_arm != 3 && exit_arm(sc, s.entry_arm, s.maneuver) != 3) tee.push_back(std::move(s.trajectory));
    save_trajectories(dir_ / "tee.csv", tee);
    std::ofstream(dir_ / "empty.csv") << "trajectory_id,t_s,x_m,y_m\n";
    std::ofstream(dir_ / "broken.csv") << "trajectory_id,t_s,x_m,y_m\nv0,0.0,abc,1\n";
  }
  static void TearDownTestSuite() { fs::remove_all(dir_); }

  static CliResult run(const std::string& args) {
    const fs::path log = dir_ / "log.txt";
    const std::string cmd = std::string(TRAJ_ATLAS_CLI) + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(log)};
  }
  static std::string path(const std::string& name) { return (dir_ / name).string(); }

  static fs::path dir_;
};

fs::path Cli::dir_;

}  // namespace

TEST_F(Cli, HelpListsEveryFlag) {
  const auto top = run("--help");
  EXPECT_EQ(top.code, 0);
  for (const char* s : {"build-map", "predict", "evaluate", "synth", "--threads"})
    EXPECT_NE(top.output.find(s), std::string::npos) << s;
  const auto build = run("build-map --help");
  EXPECT_EQ(build.code, 0);
  for (const char* f : {"--trajectories", "--config", "--out", "--dump-dir", "--matches"})
    EXPECT_NE(build.output.find(f), std::string::npos) << f;
  const auto predict = run("predict --help");
  for (const char* f : {"--map", "--observed", "--horizon-m", "--config", "--out"})
    EXPECT_NE(predict.output.find(f), std::string::npos) << f;
  const auto evaluate = run("evaluate --help");
  for (const char* f : {"--trajectories", "--config", "--out-dir", "--no-split", "--seed"})
    EXPECT_NE(evaluate.output.find(f), std::string::npos) << f;
  const auto synth = run("synth --help");
  for (const char* f : {"--config", "--out", "--count", "--seed"})
    EXPECT_NE(synth.output.find(f), std::string::npos) << f;
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run("").code, 1);
  EXPECT_EQ(run("frobnicate").code, 1);
  EXPECT_EQ(run("synth --out " + path("x.csv") + " --bogus").code, 1);
  EXPECT_EQ(run("build-map --out " + path("m.json")).code, 1);
}

TEST_F(Cli, BuildMapHasDecisionNodeAndIsDeterministic) {
  const auto a = run("build-map --trajectories " + path("tee.csv") + " --out " + path("a.json"));
  ASSERT_EQ(a.code, 0) << a.output;
  EXPECT_NE(a.output.find("decision="), std::string::npos);
  const auto b = run("--threads 1 build-map --trajectories " + path("tee.csv") + " --out " + path("b.json"));
  ASSERT_EQ(b.code, 0) << b.output;
  EXPECT_EQ(slurp(path("a.json")), slurp(path("b.json")));
  const auto map = load_behavior_map(path("a.json"));
  int decision = 0;
  for (const auto& [id, n] : map.graph.nodes()) decision += n.kind == NodeKind::Decision;
  EXPECT_GE(decision, 1);
}

TEST_F(Cli, BuildMapErrors) {
  const auto empty = run("build-map --trajectories " + path("empty.csv") + " --out " + path("e.json"));
  EXPECT_EQ(empty.code, 2);
  EXPECT_NE(empty.output.find("no trajectories"), std::string::npos);
  EXPECT_EQ(run("build-map --trajectories " + path("missing.csv") + " --out " + path("e.json")).code, 3);
  EXPECT_EQ(run("build-map --trajectories " + path("broken.csv") + " --out " + path("e.json")).code, 3);
  std::ofstream(path("typo.json")) << R"({"rastr": {}})";
  EXPECT_EQ(run("build-map --trajectories " + path("tee.csv") + " --config " + path("typo.json") + " --out " +
                path("e.json"))
                .code,
            2);
  std::ofstream(path("bad.json")) << "{";
  EXPECT_EQ(run("build-map --trajectories " + path("tee.csv") + " --config " + path("bad.json") + " --out " +
                path("e.json"))
                .code,
            3);
}

TEST_F(Cli, PredictStatusesAndExitCodes) {
  ASSERT_EQ(run("build-map --trajectories " + path("tee.csv") + " --out " + path("p.json")).code, 0);
  // Prefixes of mapped trajectories, plus one far away from the map.
  auto trajs = load_trajectories(path("tee.csv"));
  std::vector<Trajectory> obs;
  for (std::size_t i = 0; i < 3; ++i) obs.push_back(slice(trajs[i], 0, 25));
  save_trajectories(path("obs.csv"), obs);
  const auto ok = run("predict --map " + path("p.json") + " --observed " + path("obs.csv") + " --horizon-m 20 --out " +
                      path("pred.json"));
  ASSERT_EQ(ok.code, 0) << ok.output;
  const auto doc = nlohmann::json::parse(slurp(path("pred.json")));
  ASSERT_EQ(doc.size(), 3u);
  for (const auto& rec : doc) {
    EXPECT_EQ(rec["status"], "ok");
    double p = 0.0;
    for (const auto& h : rec["hypotheses"]) p += h["probability"].get<double>();
    EXPECT_NEAR(p, 1.0, 1e-9);
  }

  Trajectory far = obs[0];
  far.id = "far";
  for (auto& p : far.points) p.x += 500.0;
  obs.push_back(far);
  save_trajectories(path("obs2.csv"), obs);
  const auto partial = run("predict --map " + path("p.json") + " --observed " + path("obs2.csv"));
  EXPECT_EQ(partial.code, 5);
  EXPECT_NE(partial.output.find("no_coverage"), std::string::npos);
  EXPECT_EQ(run("predict --map " + path("p.json") + " --observed " + path("obs.csv") + " --horizon-m 0").code, 2);
  EXPECT_EQ(run("predict --map " + path("missing.json") + " --observed " + path("obs.csv")).code, 3);
}

TEST_F(Cli, SynthIsDeterministic) {
  ASSERT_EQ(run("synth --out " + path("s1.csv") + " --count 20 --seed 5").code, 0);
  ASSERT_EQ(run("synth --out " + path("s2.csv") + " --count 20 --seed 5").code, 0);
  ASSERT_EQ(run("synth --out " + path("s3.csv") + " --count 20 --seed 6").code, 0);
  EXPECT_EQ(slurp(path("s1.csv")), slurp(path("s2.csv")));
  EXPECT_NE(slurp(path("s1.csv")), slurp(path("s3.csv")));
  EXPECT_EQ(load_trajectories(path("s1.csv")).size(), 20u);
  std::ofstream(path("zero.json")) << R"({"scenario": {"straight": {"weight": 0}, "left": {"weight": 0},
                                          "right": {"weight": 0}}})";
  EXPECT_EQ(run("synth --config " + path("zero.json") + " --out " + path("z.csv")).code, 2);
}

TEST_F(Cli, EvaluateWritesReport) {
  ASSERT_EQ(run("synth --out " + path("ev.csv") + " --count 150 --seed 2").code, 0);
  const std::string common = "evaluate --trajectories " + path("ev.csv") + " --config " +
                             std::string(TRAJ_ATLAS_TEST_DATA) + "/intersection.json";
  const auto a = run("--threads 1 " + common + " --out-dir " + path("ev1"));
  ASSERT_EQ(a.code, 0) << a.output;
  const auto b = run("--threads 2 " + common + " --out-dir " + path("ev2"));
  ASSERT_EQ(b.code, 0) << b.output;
  EXPECT_EQ(slurp(path("ev1") + "/report.csv"), slurp(path("ev2") + "/report.csv"));
  std::ifstream csv(path("ev1") + "/report.csv");
  EXPECT_EQ(parse_report_csv(csv).size(), 15u);
  EXPECT_TRUE(fs::exists(path("ev1") + "/comparison.svg"));
  const auto summary = nlohmann::json::parse(slurp(path("ev1") + "/summary.json"));
  EXPECT_EQ(summary["train_trajectories"], 120);
}
