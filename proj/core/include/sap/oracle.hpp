#pragma once

// Independent verification machinery: exact enumeration of tiny PG-MDPs,
// central finite differences, the closed-form bandit objective, and the
// evaluation-table aggregation.

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sap/envs/bandit.hpp"
#include "sap/policy.hpp"
#include "sap/trainer.hpp"

namespace sap {

struct TinyOutcome {
  int next = 0;
  double reward = 0.0;
  double prob = 0.0;
  bool terminal = false;
};

/// Finite MDP with options and a discretized AP.
/// transitions[s][o][a] lists the outcomes of running option o with AP
/// value index a in state s.
struct TinyMdp {
  int num_states = 0;
  int num_options = 0;
  int num_ap = 1;
  std::vector<double> start;
  std::vector<std::vector<std::vector<std::vector<TinyOutcome>>>> transitions;

  /// Throws std::invalid_argument on inconsistent sizes or probabilities.
  void validate() const;
};

/// Stationary two-tier policy: option_prob[s][o] and ap_prob[s][o][a].
struct TinyPolicy {
  std::vector<std::vector<double>> option_prob;
  std::vector<std::vector<std::vector<double>>> ap_prob;

  void validate(const TinyMdp& mdp) const;
};

struct PgValues {
  /// P(sum of base rewards >= zeta), by path enumeration.
  double success_probability = 0.0;
  /// E[sum of indicator rewards] on the reward-augmented chain.
  double augmented_return = 0.0;
  std::size_t leaves = 0;
};

/// Computes both quantities independently: the first by walking every
/// outcome path, the second by backward recursion over augmented states
/// (t, s, eta). Throws std::invalid_argument when horizon > 8 or the outcome
/// tree exceeds max_leaves.
PgValues enumerate_pg_values(const TinyMdp& mdp, const TinyPolicy& policy, double zeta,
                             int horizon, std::size_t max_leaves = 1'000'000);

/// Random instance with `states` states, `options` options, `ap` AP values
/// and up to two outcomes per triple; rewards are small integers.
TinyMdp random_tiny_mdp(int states, int options, int ap, Rng& rng);

/// Central differences (f(x + eps e_i) - f(x - eps e_i)) / (2 eps).
/// Throws std::invalid_argument when eps <= 0.
Eigen::VectorXd finite_diff_grad(const std::function<double(const Eigen::VectorXd&)>& f,
                                 const Eigen::VectorXd& x, double eps);

/// First index whose value is within tol of the maximum.
std::size_t argmax_with_tolerance(const std::vector<double>& values, double tol = 1e-9);

/// Probability that a N(mean, variance) draw, clamped into `bounds`, lands in
/// each of `bins` evenly spaced bins (edge bins absorb the clamped tails).
std::vector<double> clamped_bin_masses(double mean, double variance, const ApBounds& bounds,
                                       int bins);
/// d/dmean of clamped_bin_masses.
std::vector<double> clamped_bin_mass_derivatives(double mean, double variance,
                                                 const ApBounds& bounds, int bins);

struct BanditObjective {
  double value = 0.0;
  Eigen::MatrixXd grad_alpha;
  Eigen::MatrixXd grad_omega;
};

/// Exact J and its gradient for the one-step bandit under `policy`, either
/// on the indicator reward (reward >= zeta) or the raw reward.
BanditObjective bandit_objective(const BanditEnv& env, const TwoTieredPolicy& policy,
                                 ObjectiveKind kind, double zeta);

/// Exact J for a single context, used to build common-random-number
/// estimators that sample contexts.
double bandit_context_value(const BanditEnv& env, const TwoTieredPolicy& policy, int context,
                            ObjectiveKind kind, double zeta);

struct MetricSummary {
  std::string label;
  double mean = 0.0;
  double std = 0.0;
};

/// Per-trial counts and averages over the final `window` episodes of each
/// trial, then mean and sample standard deviation across trials. Rows:
/// Goals, Out of Time, Captures, Successes, Avg Reward, Episode Length.
/// Throws std::invalid_argument when any trial has no episodes or window == 0.
std::vector<MetricSummary> aggregate_eval(const std::vector<std::vector<EpisodeRecord>>& trials,
                                          std::size_t window = 100);

/// Mean and sample (n - 1) standard deviation; std is 0 for one value.
MetricSummary mean_std(const std::string& label, const std::vector<double>& values);

/// CSV with header "metric,mean,std".
std::string metrics_csv(const std::vector<MetricSummary>& rows);

}  // namespace sap
