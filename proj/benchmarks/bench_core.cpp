#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "sap/config.hpp"
#include "sap/experiment.hpp"
#include "sap/oracle.hpp"
#include "sap/rollout.hpp"

namespace {

sap::Experiment preset(const char* name) {
  return sap::build_experiment(sap::load_config(std::string(SAP_PRESET_DIR) + "/" + name + ".toml"));
}

void BM_RolloutBpod(benchmark::State& state) {
  const sap::Experiment ex = preset("bpod-sap");
  sap::Rng rng(1);
  std::size_t steps = 0;
  for (auto _ : state) {
    auto tr = sap::rollout(*ex.train_env, ex.policy, ex.config.trainer.objective, rng);
    steps += tr.length();
    benchmark::DoNotOptimize(tr);
  }
  state.counters["steps/s"] = benchmark::Counter(static_cast<double>(steps), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_RolloutBpod);

void BM_RolloutStriker(benchmark::State& state) {
  const sap::Experiment ex = preset("striker-losing-sap");
  sap::Rng rng(1);
  std::size_t steps = 0;
  for (auto _ : state) {
    auto tr = sap::rollout(*ex.train_env, ex.policy, ex.config.trainer.objective, rng);
    steps += tr.length();
    benchmark::DoNotOptimize(tr);
  }
  state.counters["steps/s"] = benchmark::Counter(static_cast<double>(steps), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_RolloutStriker);

void BM_FourierFeatures(benchmark::State& state) {
  const int order = static_cast<int>(state.range(0));
  sap::FourierFeatureMap f(order, {0, 1, 2}, {{0, 1}, {0, 1}, {-100, 0}}, 4);
  const std::vector<double> obs{0.3, 0.7, -12.0, 0.1};
  Eigen::VectorXd out(static_cast<Eigen::Index>(f.dim()));
  for (auto _ : state) {
    f.evaluate(obs, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetLabel(std::to_string(f.dim()) + " features");
}
BENCHMARK(BM_FourierFeatures)->Arg(3)->Arg(5);

void BM_EstimateGradients(benchmark::State& state) {
  const sap::Experiment ex = preset("striker-losing-sap");
  sap::Rng rng(2);
  std::vector<sap::AwarenessTrajectory> batch;
  for (int i = 0; i < 10; ++i)
    batch.push_back(sap::rollout(*ex.train_env, ex.policy, ex.config.trainer.objective, rng));
  sap::TrainerConfig cfg = ex.config.trainer;
  cfg.mode = state.range(0) ? sap::GradientMode::actor_critic : sap::GradientMode::vanilla;
  sap::CriticState critic = sap::make_critic(ex.policy);
  for (auto _ : state) {
    auto g = sap::estimate_gradients(batch, ex.policy, cfg, &critic);
    benchmark::DoNotOptimize(g);
  }
  state.SetLabel(state.range(0) ? "actor-critic" : "vanilla");
}
BENCHMARK(BM_EstimateGradients)->Arg(0)->Arg(1);

void BM_TrainBpod1000(benchmark::State& state) {
  sap::ExperimentConfig cfg = sap::load_config(std::string(SAP_PRESET_DIR) + "/bpod-sap.toml");
  cfg.episodes = 1000;
  const sap::Experiment ex = sap::build_experiment(cfg);
  for (auto _ : state) {
    auto r = sap::run_training(ex, 1, {}, false);
    benchmark::DoNotOptimize(r.state.policy.ad().omega.data());
  }
}
BENCHMARK(BM_TrainBpod1000)->Unit(benchmark::kMillisecond);

void BM_Enumerate(benchmark::State& state) {
  sap::Rng rng(3);
  const sap::TinyMdp m = sap::random_tiny_mdp(3, 2, 2, rng);
  sap::TinyPolicy p;
  for (int s = 0; s < 3; ++s) {
    p.option_prob.push_back({0.5, 0.5});
    p.ap_prob.push_back({{0.5, 0.5}, {0.5, 0.5}});
  }
  for (auto _ : state) benchmark::DoNotOptimize(sap::enumerate_pg_values(m, p, 2.0, 5));
}
BENCHMARK(BM_Enumerate);

}  // namespace

BENCHMARK_MAIN();
