#include "sap/experiment.hpp"

#include "sap/envs/bandit.hpp"
#include "sap/envs/bpod.hpp"
#include "sap/envs/striker.hpp"

namespace sap {

Experiment build_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  Experiment ex;
  ex.config = cfg;
  if (cfg.env == "bpod") {
    ex.train_env = std::make_shared<BpodEnv>(cfg.bpod);
    auto eval = std::make_shared<BpodEnv>(cfg.bpod);
    eval->use_eval_starts(true);
    ex.eval_env = eval;
  } else if (cfg.env == "striker") {
    ex.train_env = std::make_shared<StrikerEnv>(cfg.striker);
    ex.eval_env = ex.train_env;
  } else {
    ex.train_env = std::make_shared<BanditEnv>(cfg.bandit);
    ex.eval_env = ex.train_env;
  }

  const auto channels = observation_channels(ex.train_env->variables());
  std::vector<OptionApSpec> specs;
  for (const auto& o : ex.train_env->options()) specs.push_back({o.ap_bounds, o.ap_offset, o.uses_ap});
  ex.policy = TwoTieredPolicy(make_feature_map(cfg.inter_features, channels, cfg.scaling),
                              make_feature_map(cfg.ad_features, channels, cfg.scaling), std::move(specs),
                              cfg.resolved_variance());
  ex.policy.set_awareness_enabled(cfg.awareness);

  for (const auto& p : cfg.probes)
    ex.probes.push_back(ProbeState{p.label, AugmentedState{EnvState{p.coords, {}}, p.eta, p.t}});
  return ex;
}

TrainResult run_training(const Experiment& ex, std::uint64_t seed,
                         std::function<void(const EpisodeRecord&)> on_episode, bool keep_log) {
  Rng rng(seed);
  TrainHooks hooks;
  hooks.probe_env = ex.train_env.get();
  hooks.probes = ex.probes;
  hooks.on_episode = std::move(on_episode);
  hooks.keep_log = keep_log;
  TrainState init{ex.policy, make_critic(ex.policy), 1, 0};
  return train(*ex.train_env, std::move(init), ex.config.schedule, ex.config.trainer,
               ex.config.episodes, rng, hooks);
}

std::uint64_t eval_seed(std::uint64_t seed) { return seed ^ 0x9e3779b97f4a7c15ULL; }

EvalResult run_eval(const Experiment& ex, const TwoTieredPolicy& policy, std::uint64_t episodes,
                    std::uint64_t seed, ActionMode mode, bool keep_trajectories) {
  Rng rng(eval_seed(seed));
  EvalResult out;
  const auto& obj = ex.config.trainer.objective;
  for (std::uint64_t e = 0; e < episodes; ++e) {
    AwarenessTrajectory tr = rollout(*ex.eval_env, policy, obj, rng, mode);
    out.episodes.push_back(summarize_episode(e, tr, obj, policy.num_options()));
    if (keep_trajectories) out.trajectories.push_back(std::move(tr));
  }
  return out;
}

}  // namespace sap
