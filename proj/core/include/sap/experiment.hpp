#pragma once

// Builds environments and policies from a configuration and runs training
// and evaluation trials.

#include <cstdint>
#include <memory>
#include <vector>

#include "sap/config.hpp"
#include "sap/rollout.hpp"
#include "sap/trainer.hpp"

namespace sap {

struct Experiment {
  ExperimentConfig config;
  std::shared_ptr<const Environment> train_env;
  /// Same dynamics; BPoD evaluates from its trap start region.
  std::shared_ptr<const Environment> eval_env;
  /// Zero-initialized policy.
  TwoTieredPolicy policy;
  std::vector<ProbeState> probes;
};

Experiment build_experiment(const ExperimentConfig& cfg);

/// Trains from a fresh policy with Rng(seed), reporting each episode to
/// `on_episode` when set.
TrainResult run_training(const Experiment& ex, std::uint64_t seed,
                         std::function<void(const EpisodeRecord&)> on_episode = {},
                         bool keep_log = true);

struct EvalResult {
  std::vector<EpisodeRecord> episodes;
  std::vector<AwarenessTrajectory> trajectories;
};

/// Frozen-parameter rollouts on the evaluation environment.
EvalResult run_eval(const Experiment& ex, const TwoTieredPolicy& policy, std::uint64_t episodes,
                    std::uint64_t seed, ActionMode mode, bool keep_trajectories = false);

/// Seed of the evaluation stream belonging to training seed `seed`.
std::uint64_t eval_seed(std::uint64_t seed);

}  // namespace sap
