#pragma once

// Likelihood-ratio gradient estimators for the two-tiered policy and the
// two-timescale projected ascent loop built on them.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sap/pg_smdp.hpp"
#include "sap/policy.hpp"
#include "sap/probes.hpp"
#include "sap/schedule.hpp"

namespace sap {

enum class ObjectiveKind {
  pg_smdp,          // indicator reward on the augmented state
  expected_return,  // raw base rewards, no threshold
};

enum class GradientMode { vanilla, actor_critic };

std::string to_string(ObjectiveKind k);
std::string to_string(GradientMode m);
ObjectiveKind objective_kind_from_string(const std::string& s);
GradientMode gradient_mode_from_string(const std::string& s);

struct TrainerConfig {
  PgSmdpConfig objective;
  ObjectiveKind kind = ObjectiveKind::pg_smdp;
  GradientMode mode = GradientMode::vanilla;
  std::size_t batch_size = 10;
  /// Subtract the batch-mean return (vanilla mode only).
  bool baseline = false;
  double alpha_radius = 50.0;
  double omega_radius = 50.0;
  /// Critic step = critic_scale * b_k.
  double critic_scale = 10.0;
  /// Rollout threads; 1 is the deterministic single-threaded default.
  std::size_t workers = 1;
  bool learn_alpha = true;
  bool learn_omega = true;
};

struct GradientEstimate {
  Eigen::MatrixXd grad_alpha;
  Eigen::MatrixXd grad_omega;
  double batch_return_mean = 0.0;
  std::size_t batch_size = 0;
};

struct CriticState {
  Eigen::VectorXd value_weights;
  double critic_step = 0.0;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Per-step reward the objective sees: the indicator reward or the base one.
double objective_reward(const TransitionRecord& r, ObjectiveKind kind);

/// sum_j gamma^j r_j.
double discounted_return(const AwarenessTrajectory& tr, ObjectiveKind kind, double gamma);

/// Eligibility sums z^alpha = sum_h grad log mu_alpha(o_h | z_h) over
/// decision steps and z^Omega = sum_h grad log mu_Omega(c_h | z_h) over steps
/// with a sampled AP.
struct Eligibility {
  Eigen::MatrixXd alpha;
  Eigen::MatrixXd omega;
};
Eligibility eligibility(const AwarenessTrajectory& tr, const TwoTieredPolicy& policy);

/// Batch gradient. Vanilla: mean over trajectories of (R_tau - baseline) *
/// eligibility. Actor-critic: per-step (return-to-go - V(z_h)) weighting,
/// with `critic` then updated by batch-averaged TD(0) at critic->critic_step.
/// Throws std::invalid_argument on an empty batch, a shape mismatch, or a
/// missing critic in actor-critic mode.
GradientEstimate estimate_gradients(std::span<const AwarenessTrajectory> batch,
                                    const TwoTieredPolicy& policy, const TrainerConfig& cfg,
                                    CriticState* critic = nullptr);

/// Euclidean-ball projection: unchanged inside the ball, rescaled onto the
/// sphere outside it.
Eigen::VectorXd project(const Eigen::VectorXd& params, double radius);
Eigen::MatrixXd project(const Eigen::MatrixXd& params, double radius);

struct EpisodeRecord {
  std::uint64_t episode = 0;
  double base_return = 0.0;
  double pg_return = 0.0;
  std::size_t length = 0;
  bool success = false;
  std::string event;
  std::vector<int> option_counts;
  std::vector<ProbeRow> ad_mean_probes;
  double alpha_norm = 0.0;
  double omega_norm = 0.0;
  std::optional<double> wall_time;
};

/// Builds a log record from a finished trajectory.
EpisodeRecord summarize_episode(std::uint64_t episode, const AwarenessTrajectory& tr,
                                const PgSmdpConfig& cfg, std::size_t num_options);

struct TrainState {
  TwoTieredPolicy policy;
  CriticState critic;
  /// Next schedule index (starts at 1).
  std::uint64_t k = 1;
  std::uint64_t episodes_done = 0;
};

struct TrainHooks {
  const Environment* probe_env = nullptr;
  std::vector<ProbeState> probes;
  std::function<void(const EpisodeRecord&)> on_episode;
  bool keep_log = true;
  bool record_wall_time = false;
  /// Replaces the sampled gradient when set (exact-gradient ascent checks).
  std::function<GradientEstimate(const TwoTieredPolicy&)> oracle_gradient;
};

struct TrainResult {
  TrainState state;
  std::vector<EpisodeRecord> log;
};

/// Algorithm loop shared by sap_train and er_train: collect a batch, estimate
/// gradients, then alpha <- Gamma(alpha + a_k g_alpha) and
/// Omega <- Gamma(Omega + b_k g_Omega). Throws std::invalid_argument on an
/// invalid schedule and NumericalError on non-finite gradients.
TrainResult train(const Environment& env, TrainState init, const StepSchedule& schedule,
                  const TrainerConfig& cfg, std::uint64_t episodes, Rng& rng,
                  const TrainHooks& hooks = {});

/// train() on the indicator reward.
TrainResult sap_train(const Environment& env, const TwoTieredPolicy& policy_init,
                      const StepSchedule& schedule, TrainerConfig cfg, std::uint64_t episodes,
                      Rng& rng, const TrainHooks& hooks = {});

/// train() on the raw base rewards.
TrainResult er_train(const Environment& env, const TwoTieredPolicy& policy_init,
                     const StepSchedule& schedule, TrainerConfig cfg, std::uint64_t episodes,
                     Rng& rng, const TrainHooks& hooks = {});

/// Fresh critic sized for the policy's AD feature map.
CriticState make_critic(const TwoTieredPolicy& policy);

}  // namespace sap
