#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "sap/checkpoint.hpp"
#include "sap/config.hpp"
#include "sap/experiment.hpp"
#include "sap/runlog.hpp"
#include "support.hpp"

namespace fs = std::filesystem;

namespace sap {
namespace {


std::string bandit_toml(const std::string& extra = "") {
  return std::string(R"([experiment]
name = "tiny"
env = "bandit"
objective = "pg-smdp"
episodes = 200
eval_episodes = 50

[pg_smdp]
zeta = 1.5

[schedule]
a0 = 0.5
b0 = 1.0

[policy]
variance = 0.25

[policy.inter_features]
terms = ["1", "x"]

[policy.ad_features]
terms = ["1", "x"]

[env.bandit]
context_x = [0.0, 1.0]
context_prob = [0.4, 0.6]
bins = 5
rewards = [[[0, 1, 2, 1, 0], [1, 1, 0, 0, 3]], [[2, 0, 0, 1, 1], [0, 2, 2, 1, 0]]]
)") + extra;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("sap-test-" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "-" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(path / name, std::ios::binary) << text;
    return path / name;
  }
};

TEST(Config, PresetsParseAndValidate) {
  for (const char* name : {"bpod-sap", "bpod-fixed-options", "striker-losing-sap", "striker-winning-sap",
                           "striker-losing-er"}) {
    const ExperimentConfig c = load_config(test::preset(name));
    EXPECT_EQ(c.name, name);
    EXPECT_NO_THROW(build_experiment(c));
  }
  const ExperimentConfig s = load_config(test::preset("striker-losing-sap"));
  EXPECT_EQ(s.episodes, 20000u);
  EXPECT_EQ(s.trials, 3u);
  EXPECT_EQ(s.trainer.objective.horizon, 150);
  const ExperimentConfig er = load_config(test::preset("striker-losing-er"));
  EXPECT_EQ(er.trainer.kind, ObjectiveKind::expected_return);
  EXPECT_FALSE(er.zeta.has_value());
  const ExperimentConfig b = load_config(test::preset("bpod-sap"));
  EXPECT_EQ(b.zeta, 50.0);
  EXPECT_EQ(b.bpod.options[0].east_ap_bounds.lo, -0.05);
  EXPECT_EQ(b.bpod.options[0].east_ap_bounds.hi, 0.05);
}

TEST(Config, MissingZetaIsRejected) {
  const std::string text = bandit_toml();
  const std::string no_zeta = text.substr(0, text.find("[pg_smdp]")) + text.substr(text.find("[schedule]"));
  EXPECT_THROW(parse_config(no_zeta), ConfigError);
}

TEST(Config, ErrorsCarryLines) {
  try {
    parse_config(bandit_toml("bogus_key = 3\n"), "cfg.toml");
    FAIL() << "unknown key accepted";
  } catch (const ConfigError& e) {
    EXPECT_GT(e.line(), 0);
    EXPECT_NE(std::string(e.what()).find("bogus_key"), std::string::npos);
  }
  try {
    parse_config("[experiment]\nname = \"x\"\nepisodes = \"many\"\n", "cfg.toml");
    FAIL() << "type error accepted";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line(), 3);
  }
  try {
    parse_config("[experiment\n", "cfg.toml");
    FAIL() << "syntax error accepted";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line(), 1);
  }
  EXPECT_THROW(parse_config(bandit_toml() + "\n[trainer]\nmode = \"critic-only\"\n"), ConfigError);
}

TEST(Config, InvalidScheduleIsRejected) {
  std::string text = bandit_toml();
  text.replace(text.find("b0 = 1.0"), 8, "b0 = 0.5");
  text.replace(text.find("a0 = 0.5"), 8, "a0 = 1.0");
  EXPECT_THROW(parse_config(text), ConfigError);
}

TEST(Config, HashTracksEveryField) {
  const ExperimentConfig base = parse_config(bandit_toml());
  EXPECT_EQ(config_hash(base), config_hash(parse_config(bandit_toml())));
  EXPECT_EQ(config_hash(base).size(), 16u);
  std::set<std::string> hashes{config_hash(base)};
  auto variant = [&](auto mutate) {
    ExperimentConfig c = base;
    mutate(c);
    EXPECT_TRUE(hashes.insert(config_hash(c)).second);
  };
  variant([](ExperimentConfig& c) { c.episodes += 1; });
  variant([](ExperimentConfig& c) { c.schedule.a0 = 0.25; });
  variant([](ExperimentConfig& c) { c.trainer.baseline = !c.trainer.baseline; });
  variant([](ExperimentConfig& c) { c.bandit.rewards[0][0][0] = 9; });
  variant([](ExperimentConfig& c) { c.zeta = 2.0; });
  variant([](ExperimentConfig& c) { c.ad_features.terms.push_back("x^2"); });
  variant([](ExperimentConfig& c) { c.scaling["x"] = {0.0, 2.0}; });
  variant([](ExperimentConfig& c) { c.striker.goal_reward = 4.0; });
  variant([](ExperimentConfig& c) { c.name = "other"; });
}

TEST(Checkpoint, RoundTripIsByteIdentical) {
  const ExperimentConfig cfg = parse_config(bandit_toml());
  const Experiment ex = build_experiment(cfg);
  Rng rng(5);
  TrainHooks hooks;
  hooks.keep_log = false;
  TrainState init{ex.policy, make_critic(ex.policy), 1, 0};
  TrainResult r = train(*ex.train_env, init, cfg.schedule, cfg.trainer, 200, rng, hooks);
  r.state.policy.ad().omega(0, 1) = 0.1 + 0.2;  // not exactly representable in short decimal
  const Checkpoint c = make_checkpoint(r.state, rng, config_hash(cfg), cfg.env);
  const std::string text = serialize_checkpoint(c);
  EXPECT_EQ(serialize_checkpoint(parse_checkpoint(text)), text);

  TempDir tmp;
  save_checkpoint((tmp.path / "a.json").string(), c);
  save_checkpoint((tmp.path / "b.json").string(), load_checkpoint((tmp.path / "a.json").string()));
  EXPECT_EQ(read_file(tmp.path / "a.json"), read_file(tmp.path / "b.json"));

  TrainState restored{ex.policy, make_critic(ex.policy), 1, 0};
  Rng rng2(0);
  apply_checkpoint(parse_checkpoint(text), restored, &rng2);
  EXPECT_EQ(restored.policy.inter().alpha, r.state.policy.inter().alpha);
  EXPECT_EQ(restored.policy.ad().omega, r.state.policy.ad().omega);
  EXPECT_EQ(restored.k, r.state.k);
  EXPECT_EQ(restored.episodes_done, 200u);
  EXPECT_EQ(rng2(), rng());
}

TEST(Checkpoint, VersionAndShapeErrors) {
  const ExperimentConfig cfg = parse_config(bandit_toml());
  const Experiment ex = build_experiment(cfg);
  TrainState st{ex.policy, make_critic(ex.policy), 1, 0};
  Checkpoint c = make_checkpoint(st, Rng(1), "h", "bandit");
  c.version = kCheckpointVersion + 1;
  EXPECT_THROW(parse_checkpoint(serialize_checkpoint(c)), VersionError);
  EXPECT_THROW(parse_checkpoint("{not json"), std::runtime_error);
  c.version = kCheckpointVersion;
  c.alpha.resize(3, 3);
  c.alpha.setZero();
  EXPECT_THROW(apply_checkpoint(c, st), std::invalid_argument);
}

EpisodeRecord sample_record() {
  EpisodeRecord r;
  r.episode = 7;
  r.base_return = -3.25;
  r.pg_return = 1.0;
  r.length = 12;
  r.success = true;
  r.event = "goal";
  r.option_counts = {4, 8};
  r.ad_mean_probes = {{"X", 0, -0.0625}, {"X", 1, 0.1}};
  r.alpha_norm = 0.5;
  r.omega_norm = 1.0 / 3.0;
  return r;
}

TEST(RunLog, JsonRoundTrip) {
  const EpisodeRecord r = sample_record();
  const std::string line = episode_json(r);
  EXPECT_EQ(line.find('\n'), std::string::npos);
  EXPECT_NE(line.find("\"wall_time\":null"), std::string::npos);
  const EpisodeRecord back = parse_episode_json(line);
  EXPECT_EQ(episode_json(back), line);
  EXPECT_EQ(back.option_counts, r.option_counts);
  EXPECT_EQ(back.omega_norm, r.omega_norm);
  EXPECT_THROW(parse_episode_json(R"({"episode": 1})"), SchemaError);
  EXPECT_THROW(parse_episode_json("oops"), SchemaError);
}

TEST(RunLog, PlotData) {
  std::vector<EpisodeRecord> t1, t2;
  for (int i = 0; i < 5; ++i) {
    EpisodeRecord r = sample_record();
    r.episode = i;
    r.base_return = i * 1.5;
    t1.push_back(r);
    r.base_return = -i;
    t2.push_back(r);
  }
  const std::string csv = plot_data_csv({t1, t2});
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "trial,episode,metric,value");
  std::set<std::string> trials;
  std::string first;
  double running = 0.0;
  long last_probe_episode = -1;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string trial, ep, metric, value;
    std::getline(ss, trial, ',');
    std::getline(ss, ep, ',');
    std::getline(ss, metric, ',');
    std::getline(ss, value, ',');
    trials.insert(trial);
    if (first.empty()) first = trial;
    if (trial != first) continue;
    if (metric == "return") running += std::stod(value);
    if (metric == "cumulative_return") {
      EXPECT_NEAR(std::stod(value), running, 1e-9);
    }
    if (metric == "probe:X:0") {
      EXPECT_GT(std::stol(ep), last_probe_episode);
      last_probe_episode = std::stol(ep);
    }
  }
  EXPECT_EQ(trials.size(), 2u);
  EXPECT_EQ(last_probe_episode, 4);
  EXPECT_NEAR(running, 15.0, 1e-12);
}

TEST(RunLog, FileRoundTripAndLineNumbers) {
  TempDir tmp;
  const std::vector<EpisodeRecord> recs{sample_record(), sample_record()};
  write_run_log((tmp.path / "run.jsonl").string(), recs);
  EXPECT_EQ(read_run_log((tmp.path / "run.jsonl").string()).size(), 2u);
  const auto bad = tmp.write("bad.jsonl", episode_json(sample_record()) + "\n{\"episode\": 2}\n");
  try {
    read_run_log(bad.string());
    FAIL();
  } catch (const SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find(":2"), std::string::npos) << e.what();
  }
}

TEST(RunLog, TrajectoryCsvRowCount) {
  const Experiment ex = build_experiment(load_config(test::preset("striker-losing-sap")));
  const EvalResult r = run_eval(ex, ex.policy, 5, 1, ActionMode::sample, true);
  const std::string csv = trajectory_csv(r.trajectories, *ex.eval_env);
  std::size_t lines = 0, steps = 0;
  for (char ch : csv) lines += ch == '\n';
  for (const auto& t : r.trajectories) steps += t.length();
  EXPECT_EQ(lines, steps + 1);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "episode,t,option,ap,base_reward,eta,terminal,x,y,ball_x,ball_y,dist_goal,possession,keeper_y");
}

#ifdef SAP_CLI_PATH
int run_cli(const std::string& args, const fs::path& out = {}) {
  std::string cmd = std::string(SAP_CLI_PATH) + " " + args;
  cmd += out.empty() ? " >/dev/null 2>&1" : " >" + out.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Cli, TrainEvalExportDeterminism) {
  TempDir tmp;
  const auto cfg = tmp.write("tiny.toml", bandit_toml());
  ASSERT_EQ(run_cli("train " + cfg.string() + " --seed 4 --out " + (tmp.path / "a").string() + " --quiet"), 0);
  ASSERT_EQ(run_cli("train " + cfg.string() + " --seed 4 --out " + (tmp.path / "b").string() + " --quiet"), 0);
  EXPECT_EQ(read_file(tmp.path / "a/run.jsonl"), read_file(tmp.path / "b/run.jsonl"));
  EXPECT_EQ(read_file(tmp.path / "a/summary.json"), read_file(tmp.path / "b/summary.json"));
  EXPECT_EQ(read_file(tmp.path / "a/checkpoint.json"), read_file(tmp.path / "b/checkpoint.json"));
  const std::string summary = read_file(tmp.path / "a/summary.json");
  EXPECT_NE(summary.find(config_hash(parse_config(bandit_toml()))), std::string::npos);

  ASSERT_EQ(run_cli("eval --checkpoint " + (tmp.path / "a/checkpoint.json").string() + " --config " +
                    cfg.string() + " --episodes 100 --greedy --dump-trajectories --out " +
                    (tmp.path / "ev").string()),
            0);
  const std::string metrics = read_file(tmp.path / "ev/metrics.csv");
  EXPECT_NE(metrics.find("Episode Length"), std::string::npos);
  std::size_t rows = 0;
  for (char ch : read_file(tmp.path / "ev/trajectories.csv")) rows += ch == '\n';
  EXPECT_EQ(rows, 101u);  // one-step episodes plus the header

  ASSERT_EQ(run_cli("export-plot-data " + (tmp.path / "a/run.jsonl").string() + " " +
                    (tmp.path / "b/run.jsonl").string() + " -o " + (tmp.path / "plot.csv").string()),
            0);
  EXPECT_EQ(read_file(tmp.path / "plot.csv").substr(0, 26), "trial,episode,metric,value");
}

TEST(Cli, TrialsAndEnvOutDir) {
  TempDir tmp;
  const auto cfg = tmp.write("tiny.toml", bandit_toml());
  const std::string cmd = "env SAP_OUT_DIR=" + tmp.path.string() + " " + SAP_CLI_PATH + " train " +
                          cfg.string() + " --trials 2 --episodes 50 --quiet >/dev/null 2>&1";
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  EXPECT_TRUE(fs::exists(tmp.path / "tiny/trial-0/run.jsonl"));
  EXPECT_TRUE(fs::exists(tmp.path / "tiny/trial-1/summary.json"));
  EXPECT_TRUE(fs::exists(tmp.path / "tiny/metrics.csv"));
}

TEST(Cli, UntrainedCheckpointStrikerEval) {
  TempDir tmp;
  const Experiment ex = build_experiment(load_config(test::preset("striker-winning-sap")));
  TrainState st{ex.policy, make_critic(ex.policy), 1, 0};
  save_checkpoint((tmp.path / "ck.json").string(),
                  make_checkpoint(st, Rng(1), config_hash(ex.config), "striker"));
  ASSERT_EQ(run_cli("eval --checkpoint " + (tmp.path / "ck.json").string() + " --config " +
                        test::preset("striker-winning-sap") + " --episodes 100 --greedy",
                    tmp.path / "out.txt"),
            0);
  EXPECT_NE(read_file(tmp.path / "out.txt").find("Episode Length"), std::string::npos);
  EXPECT_NE(run_cli("eval --checkpoint " + (tmp.path / "ck.json").string() + " --config " +
                    test::preset("bpod-sap")),
            0);
}

TEST(Cli, ExitCodes) {
  TempDir tmp;
  EXPECT_EQ(run_cli("validate-config " + test::preset("bpod-sap") + " " + test::preset("striker-losing-er")), 0);
  const auto bad = tmp.write("bad.toml", bandit_toml("typo = 1\n"));
  EXPECT_EQ(run_cli("validate-config " + bad.string(), tmp.path / "err.txt"), 2);
  EXPECT_NE(read_file(tmp.path / "err.txt").find("bad.toml:"), std::string::npos);
  const auto ck = tmp.write("ck.json", R"({"format": "sap-checkpoint", "version": 99})");
  EXPECT_EQ(run_cli("eval --checkpoint " + ck.string() + " --config " + test::preset("bpod-sap")), 4);
  EXPECT_NE(run_cli("frobnicate"), 0);
}
#endif

}  // namespace
}  // namespace sap
