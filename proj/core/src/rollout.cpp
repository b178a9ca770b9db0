#include "sap/rollout.hpp"

#include <random>
#include <stdexcept>

namespace sap {
namespace {

int greedy_option(const TwoTieredPolicy& policy, const Eigen::VectorXd& phi, OptionMask mask) {
  const Eigen::VectorXd p = option_probabilities(policy.inter(), phi, mask);
  Eigen::Index best = -1;
  for (Eigen::Index o = 0; o < p.size(); ++o)
    if (p[o] > 0.0 && (best < 0 || p[o] > p[best])) best = o;
  return static_cast<int>(best);
}

}  // namespace

std::vector<double> observe(const Environment& env, const AugmentedState& z, int horizon) {
  const std::size_t n = env.variables().size();
  std::vector<double> obs(n + 2);
  env.observe(z.base, std::span<double>(obs.data(), n));
  obs[n] = z.eta;
  obs[n + 1] = static_cast<double>(z.t) / static_cast<double>(horizon);
  return obs;
}

AwarenessTrajectory rollout(const Environment& env, const TwoTieredPolicy& policy,
                            const PgSmdpConfig& cfg, Rng& rng, ActionMode mode) {
  EnvState start = env.reset(rng);
  return rollout_from(env, policy, cfg, std::move(start), rng, mode);
}

AwarenessTrajectory rollout_from(const Environment& env, const TwoTieredPolicy& policy,
                                 const PgSmdpConfig& cfg, EnvState start, Rng& rng,
                                 ActionMode mode) {
  const auto& options = env.options();
  if (options.size() != policy.num_options())
    throw std::invalid_argument("policy and environment disagree on the option count");

  AwarenessTrajectory tr;
  tr.steps.reserve(static_cast<std::size_t>(cfg.horizon));
  AugmentedState z{std::move(start), 0.0, 0};
  int current = -1;
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  while (true) {
    TransitionRecord rec;
    rec.observation = observe(env, z, cfg.horizon);
    rec.z = z;

    if (current < 0) {
      rec.available.resize(options.size());
      bool any = false;
      for (std::size_t o = 0; o < options.size(); ++o) {
        rec.available[o] = options[o].can_start(z) ? 1 : 0;
        any = any || rec.available[o];
      }
      if (!any) throw std::runtime_error("no option can start in the current state");
      const Eigen::VectorXd phi = policy.inter_map()(rec.observation);
      current = mode == ActionMode::greedy ? greedy_option(policy, phi, rec.available)
                                           : sample_option(policy.inter(), phi, rng, rec.available);
      rec.decision = true;
    } else {
      rec.decision = false;
    }
    rec.option_id = current;

    if (policy.samples_ap(current)) {
      const Eigen::VectorXd psi = policy.ad_map()(rec.observation);
      if (mode == ActionMode::greedy) {
        rec.ap = policy.greedy_ap(current, psi);
        rec.raw_ap = rec.ap;
      } else {
        const ApSample s = policy.draw_ap(current, psi, rng);
        rec.ap = s.clamped;
        rec.raw_ap = s.raw;
        rec.ap_sampled = true;
      }
    } else {
      rec.ap = rec.raw_ap = policy.greedy_ap(current, Eigen::VectorXd());
    }

    StepResult res = env.step(z.base, current, rec.ap, rng);
    rec.base_reward = res.reward;
    rec.z_next = augment_transition(z, res.reward, std::move(res.next), cfg.horizon);
    rec.terminal = res.terminal || rec.z_next.t >= cfg.horizon;
    rec.pg_reward = rec.terminal ? terminal_pg_reward(rec.z_next, cfg) : 0.0;

    z = rec.z_next;
    const bool done = rec.terminal;
    if (done) tr.event = res.terminal ? res.event : "out_of_time";
    tr.steps.push_back(std::move(rec));
    if (done) break;

    const double beta = options[static_cast<std::size_t>(current)].beta(z);
    if (beta >= 1.0 || unit(rng) < beta) current = -1;
  }
  return tr;
}

}  // namespace sap
