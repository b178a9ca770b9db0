// sap: train, evaluate and export data for situationally aware options.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sap/checkpoint.hpp"
#include "sap/config.hpp"
#include "sap/experiment.hpp"
#include "sap/oracle.hpp"
#include "sap/runlog.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

enum Exit { kOk = 0, kError = 1, kBadConfig = 2, kNumerical = 3, kVersion = 4 };

std::string default_out(const sap::ExperimentConfig& cfg) {
  if (const char* env = std::getenv("SAP_OUT_DIR"); env && *env) return (fs::path(env) / cfg.name).string();
  return (fs::path("runs") / cfg.name).string();
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
}

ordered_json metrics_json(const std::vector<sap::MetricSummary>& rows) {
  ordered_json j = ordered_json::object();
  for (const auto& r : rows) j[r.label] = r.mean;
  return j;
}

void print_table(const std::vector<sap::MetricSummary>& rows) {
  for (const auto& r : rows) std::printf("  %-16s %10.3f +- %.3f\n", r.label.c_str(), r.mean, r.std);
}

struct TrainArgs {
  std::string config;
  std::uint64_t seed = 1;
  std::string out;
  std::uint64_t trials = 0;
  std::size_t workers = 0;
  std::uint64_t episodes = 0;
  std::uint64_t eval_episodes = 0;
  bool wall_time = false;
  bool quiet = false;
};

int cmd_train(const TrainArgs& a) {
  sap::ExperimentConfig cfg = sap::load_config(a.config);
  if (a.episodes) cfg.episodes = a.episodes;
  if (a.eval_episodes) cfg.eval_episodes = a.eval_episodes;
  if (a.trials) cfg.trials = a.trials;
  if (a.workers) cfg.trainer.workers = a.workers;
  const sap::Experiment ex = sap::build_experiment(cfg);
  const std::string hash = sap::config_hash(cfg);
  const fs::path root = a.out.empty() ? default_out(cfg) : a.out;
  fs::create_directories(root);

  std::vector<std::vector<sap::EpisodeRecord>> train_tail, evals;
  for (std::uint64_t i = 0; i < cfg.trials; ++i) {
    const std::uint64_t seed = a.seed + i;
    const fs::path dir = cfg.trials > 1 ? root / ("trial-" + std::to_string(i)) : root;
    fs::create_directories(dir);

    sap::RunLogWriter log((dir / "run.jsonl").string());
    std::vector<sap::EpisodeRecord> tail;
    const std::size_t window = 100;
    sap::Rng rng(seed);
    sap::TrainHooks hooks;
    hooks.probe_env = ex.train_env.get();
    hooks.probes = ex.probes;
    hooks.keep_log = false;
    hooks.record_wall_time = a.wall_time;
    hooks.on_episode = [&](const sap::EpisodeRecord& r) {
      log.write(r);
      tail.push_back(r);
      if (tail.size() > 2 * window) tail.erase(tail.begin(), tail.end() - window);
    };
    sap::TrainState init{ex.policy, sap::make_critic(ex.policy), 1, 0};
    const sap::TrainResult res =
        sap::train(*ex.train_env, std::move(init), cfg.schedule, cfg.trainer, cfg.episodes, rng, hooks);
    log.flush();

    sap::save_checkpoint((dir / "checkpoint.json").string(),
                         sap::make_checkpoint(res.state, rng, hash, cfg.env));

    const auto eval = sap::run_eval(ex, res.state.policy, cfg.eval_episodes, seed, sap::ActionMode::greedy);
    const auto train_rows = sap::aggregate_eval({tail}, window);
    const auto eval_rows = sap::aggregate_eval({eval.episodes}, eval.episodes.size());
    train_tail.push_back(tail);
    evals.push_back(eval.episodes);

    ordered_json summary;
    summary["name"] = cfg.name;
    summary["config_hash"] = hash;
    summary["seed"] = seed;
    summary["episodes"] = res.state.episodes_done;
    summary["train_last_100"] = metrics_json(train_rows);
    summary["eval"] = {{"episodes", cfg.eval_episodes}, {"mode", "greedy"}, {"metrics", metrics_json(eval_rows)}};
    ordered_json probes = ordered_json::array();
    for (const auto& p : sap::probe_ad_means(*ex.train_env, res.state.policy, ex.probes,
                                             cfg.trainer.objective.horizon))
      probes.push_back({{"label", p.label}, {"option", p.option}, {"mean", p.mean}});
    summary["final_probes"] = probes;
    write_text(dir / "summary.json", summary.dump(2) + "\n");

    if (!a.quiet) {
      std::printf("trial %llu (seed %llu): greedy eval over %llu episodes\n",
                  static_cast<unsigned long long>(i), static_cast<unsigned long long>(seed),
                  static_cast<unsigned long long>(cfg.eval_episodes));
      print_table(eval_rows);
    }
  }
  const auto rows = sap::aggregate_eval(evals, cfg.eval_episodes);
  write_text(root / "metrics.csv", sap::metrics_csv(rows));
  if (!a.quiet && cfg.trials > 1) {
    std::printf("all trials:\n");
    print_table(rows);
  }
  std::printf("config hash %s, output in %s\n", hash.c_str(), root.string().c_str());
  return kOk;
}

struct EvalArgs {
  std::string checkpoint;
  std::string config;
  std::uint64_t episodes = 100;
  bool greedy = false;
  std::uint64_t seed = 1;
  std::string out;
  bool dump = false;
};

int cmd_eval(const EvalArgs& a) {
  const sap::ExperimentConfig cfg = sap::load_config(a.config);
  const sap::Experiment ex = sap::build_experiment(cfg);
  const sap::Checkpoint ck = sap::load_checkpoint(a.checkpoint);
  if (ck.env != cfg.env)
    throw std::invalid_argument("checkpoint was trained on '" + ck.env + "' but the config selects '" +
                                cfg.env + "'");
  if (ck.config_hash != sap::config_hash(cfg))
    std::fprintf(stderr, "note: checkpoint config hash %s differs from %s\n", ck.config_hash.c_str(),
                 sap::config_hash(cfg).c_str());
  sap::TrainState st{ex.policy, sap::make_critic(ex.policy), 1, 0};
  sap::apply_checkpoint(ck, st);

  const auto mode = a.greedy ? sap::ActionMode::greedy : sap::ActionMode::sample;
  const auto res = sap::run_eval(ex, st.policy, a.episodes, a.seed, mode, a.dump);
  const auto rows = sap::aggregate_eval({res.episodes}, res.episodes.size());
  const std::string csv = sap::metrics_csv(rows);
  if (a.out.empty()) {
    std::cout << csv;
  } else {
    fs::create_directories(a.out);
    write_text(fs::path(a.out) / "metrics.csv", csv);
    if (a.dump) write_text(fs::path(a.out) / "trajectories.csv", sap::trajectory_csv(res.trajectories, *ex.eval_env));
    print_table(rows);
  }
  if (a.dump && a.out.empty())
    std::fprintf(stderr, "note: --dump-trajectories needs --out; no trajectory file written\n");
  return kOk;
}

int cmd_export(const std::vector<std::string>& logs, const std::string& out) {
  std::vector<std::vector<sap::EpisodeRecord>> trials;
  for (const auto& p : logs) trials.push_back(sap::read_run_log(p));
  const std::string csv = sap::plot_data_csv(trials);
  if (out.empty() || out == "-")
    std::cout << csv;
  else
    write_text(out, csv);
  return kOk;
}

int cmd_validate(const std::vector<std::string>& configs) {
  for (const auto& p : configs) {
    const auto cfg = sap::load_config(p);
    sap::build_experiment(cfg);
    std::printf("%s: ok (%s, hash %s)\n", p.c_str(), cfg.name.c_str(), sap::config_hash(cfg).c_str());
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Situationally aware options: PG-SMDP training and evaluation"};
  app.require_subcommand(1);

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "Train on a config; writes run.jsonl, checkpoint.json, summary.json");
  train->add_option("config", ta.config, "Experiment config (.toml)")->required()->check(CLI::ExistingFile);
  train->add_option("--seed", ta.seed, "Seed of the first trial")->capture_default_str();
  train->add_option("--out", ta.out, "Output directory (default $SAP_OUT_DIR/<name> or runs/<name>)");
  train->add_option("--trials", ta.trials, "Number of trials, seeds seed..seed+n-1 (overrides config)");
  train->add_option("--workers", ta.workers, "Rollout threads (1 = deterministic default)");
  train->add_option("--episodes", ta.episodes, "Training episodes per trial (overrides config)");
  train->add_option("--eval-episodes", ta.eval_episodes, "Greedy evaluation episodes after training");
  train->add_flag("--wall-time", ta.wall_time, "Record wall-clock time in the run log");
  train->add_flag("--quiet", ta.quiet, "Only print the final line");

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint with frozen parameters");
  eval->add_option("--checkpoint", ea.checkpoint, "checkpoint.json")->required()->check(CLI::ExistingFile);
  eval->add_option("--config", ea.config, "Experiment config (.toml)")->required()->check(CLI::ExistingFile);
  eval->add_option("--episodes", ea.episodes, "Evaluation episodes")->capture_default_str();
  eval->add_flag("--greedy", ea.greedy, "Argmax option and AD-mean AP");
  eval->add_option("--seed", ea.seed, "Evaluation seed")->capture_default_str();
  eval->add_option("--out", ea.out, "Directory for metrics.csv (stdout when omitted)");
  eval->add_flag("--dump-trajectories", ea.dump, "Also write trajectories.csv");

  std::vector<std::string> logs;
  std::string plot_out;
  auto* exp = app.add_subcommand("export-plot-data", "Tidy CSV (trial, episode, metric, value) from run logs");
  exp->add_option("logs", logs, "run.jsonl files, one per trial")->required()->check(CLI::ExistingFile);
  exp->add_option("-o,--out", plot_out, "Output CSV (stdout when omitted)");

  std::vector<std::string> configs;
  auto* val = app.add_subcommand("validate-config", "Parse and validate configs");
  val->add_option("configs", configs, "Config files")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) return cmd_train(ta);
    if (*eval) return cmd_eval(ea);
    if (*exp) return cmd_export(logs, plot_out);
    if (*val) return cmd_validate(configs);
  } catch (const sap::ConfigError& e) {
    std::fprintf(stderr, "invalid config: %s\n", e.what());
    return kBadConfig;
  } catch (const sap::NumericalError& e) {
    std::fprintf(stderr, "aborted: %s\n", e.what());
    return kNumerical;
  } catch (const sap::VersionError& e) {
    std::fprintf(stderr, "version mismatch: %s\n", e.what());
    return kVersion;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kError;
  }
  return kError;
}
