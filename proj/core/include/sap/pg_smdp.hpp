#pragma once

// Probabilistic-goal SMDP: reward-augmented states, the terminal indicator
// reward, and the environment abstraction consumed by the trainers.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace sap {

using Rng = std::mt19937_64;

struct EnvState {
  std::vector<double> coords;
  std::string scenario_tag;

  bool operator==(const EnvState&) const = default;
};

/// Base state paired with the accumulated base reward `eta` and the
/// timestep index `t`.
struct AugmentedState {
  EnvState base;
  double eta = 0.0;
  int t = 0;

  bool operator==(const AugmentedState&) const = default;
};

struct PgSmdpConfig {
  double zeta = 0.0;
  int horizon = 1;
  double gamma = 1.0;

  /// Throws std::invalid_argument when horizon < 1, gamma outside [0, 1] or
  /// zeta is not finite.
  void validate() const;
};

struct ApBounds {
  double lo = 0.0;
  double hi = 0.0;

  double clamp(double c) const { return c < lo ? lo : (c > hi ? hi : c); }
  double width() const { return hi - lo; }
};

/// Option descriptor. The intra-option controller itself is executed by the
/// owning Environment's step(); the awareness-distribution weights live in
/// row `id` of the policy's omega matrix.
struct SituationallyAwareOption {
  int id = 0;
  std::string name;
  std::function<bool(const AugmentedState&)> initiation;
  std::function<double(const AugmentedState&)> termination;
  ApBounds ap_bounds;
  /// Added to the raw Gaussian draw before clamping, so a zero AD mean maps
  /// to a domain-specific resting point.
  double ap_offset = 0.0;
  /// Options whose controller ignores the AP skip sampling it.
  bool uses_ap = true;

  bool can_start(const AugmentedState& z) const { return !initiation || initiation(z); }
  /// Termination probability, clamped into [0, 1].
  double beta(const AugmentedState& z) const;
};

struct StepResult {
  EnvState next;
  double reward = 0.0;
  bool terminal = false;
  std::string event;
};

/// Stateless dynamics: all episode state travels in EnvState, so one
/// instance can serve concurrent rollout workers.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string name() const = 0;
  virtual const std::vector<SituationallyAwareOption>& options() const = 0;
  /// Names of the observation channels written by observe().
  virtual std::vector<std::string> variables() const = 0;
  virtual void observe(const EnvState& s, std::span<double> out) const = 0;

  virtual EnvState reset(Rng& rng) const = 0;
  /// Runs one primitive step of `option` with the (already clamped)
  /// awareness parameter `ap`.
  virtual StepResult step(const EnvState& s, int option, double ap, Rng& rng) const = 0;

  std::size_t num_options() const { return options().size(); }
};

struct TransitionRecord {
  AugmentedState z;
  int option_id = 0;
  /// True when the option was freshly drawn from the inter-option policy at
  /// this step (as opposed to continuing because beta said so).
  bool decision = true;
  /// Options whose initiation set contained z at the decision.
  std::vector<std::uint8_t> available;
  /// Observation of z: environment variables followed by eta and t / T.
  std::vector<double> observation;
  double ap = 0.0;      // clamped value handed to the environment
  double raw_ap = 0.0;  // Gaussian draw, used for the score function
  bool ap_sampled = false;
  double base_reward = 0.0;
  double pg_reward = 0.0;
  AugmentedState z_next;
  bool terminal = false;
};

struct AwarenessTrajectory {
  std::vector<TransitionRecord> steps;
  std::string event;

  std::size_t length() const { return steps.size(); }
  double base_return() const;
  double pg_return() const;
  /// Checks the per-record invariants (eta and t bookkeeping, terminal only
  /// on the last record). Throws std::logic_error on violation.
  void check_invariants(const PgSmdpConfig& cfg) const;
};

/// {s', eta + r, t + 1}. Throws on non-finite reward or z.t >= horizon.
AugmentedState augment_transition(const AugmentedState& z, double base_reward, EnvState s_next,
                                  int horizon);

/// Indicator reward: 1 iff z.t == T and z.eta >= zeta.
double pg_reward(const AugmentedState& z, const PgSmdpConfig& cfg);

/// pg_reward for a state at which the episode ended, with the termination
/// time treated as T (early goals and deaths are scored immediately).
double terminal_pg_reward(const AugmentedState& z, const PgSmdpConfig& cfg);

/// Fraction of trajectories whose base return reaches zeta. Asserts that the
/// value equals the batch mean of summed pg rewards.
double success_probability_estimate(std::span<const AwarenessTrajectory> trajectories,
                                    const PgSmdpConfig& cfg);

}  // namespace sap
