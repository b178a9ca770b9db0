#include "sap/trainer.hpp"

#include <chrono>
#include <cmath>
#include <thread>

#include "sap/rollout.hpp"

namespace sap {
namespace {

void check_batch(std::span<const AwarenessTrajectory> batch, const TwoTieredPolicy& policy) {
  if (batch.empty()) throw std::invalid_argument("empty trajectory batch");
  const std::size_t obs_size = policy.inter_map().input_size();
  for (const auto& tr : batch) {
    if (tr.steps.empty()) throw std::invalid_argument("empty trajectory in batch");
    for (const auto& r : tr.steps) {
      if (r.option_id < 0 || static_cast<std::size_t>(r.option_id) >= policy.num_options())
        throw std::invalid_argument("trajectory option id outside the policy's option set");
      if (r.observation.size() != obs_size)
        throw std::invalid_argument("trajectory observations do not match the policy features");
      if (r.decision && r.available.size() != policy.num_options())
        throw std::invalid_argument("trajectory availability mask does not match the policy");
    }
  }
}

bool all_finite(const Eigen::MatrixXd& m) { return m.allFinite(); }

/// Per-step scores, accumulated into the given matrices scaled by `weight`.
void add_step_scores(const TransitionRecord& r, const TwoTieredPolicy& policy, double weight,
                     Eigen::MatrixXd& ga, Eigen::MatrixXd& go) {
  if (weight == 0.0) return;
  if (r.decision) {
    const Eigen::VectorXd phi = policy.inter_map()(r.observation);
    ga.noalias() += weight * log_prob_grad_alpha(policy.inter(), phi, r.option_id, r.available);
  }
  if (r.ap_sampled) {
    const Eigen::VectorXd psi = policy.ad_map()(r.observation);
    const auto& spec = policy.option_specs()[static_cast<std::size_t>(r.option_id)];
    go.row(r.option_id) += weight * gaussian_score(policy.ad().omega.row(r.option_id).transpose(),
                                                   psi, r.raw_ap, policy.ad().variance,
                                                   spec.offset)
                                        .transpose();
  }
}

}  // namespace

std::string to_string(ObjectiveKind k) {
  return k == ObjectiveKind::pg_smdp ? "pg-smdp" : "expected-return";
}

std::string to_string(GradientMode m) {
  return m == GradientMode::vanilla ? "vanilla" : "actor-critic";
}

ObjectiveKind objective_kind_from_string(const std::string& s) {
  if (s == "pg-smdp") return ObjectiveKind::pg_smdp;
  if (s == "expected-return") return ObjectiveKind::expected_return;
  throw std::invalid_argument("unknown objective '" + s + "'");
}

GradientMode gradient_mode_from_string(const std::string& s) {
  if (s == "vanilla") return GradientMode::vanilla;
  if (s == "actor-critic") return GradientMode::actor_critic;
  throw std::invalid_argument("unknown gradient mode '" + s + "'");
}

double objective_reward(const TransitionRecord& r, ObjectiveKind kind) {
  return kind == ObjectiveKind::pg_smdp ? r.pg_reward : r.base_reward;
}

double discounted_return(const AwarenessTrajectory& tr, ObjectiveKind kind, double gamma) {
  double ret = 0.0;
  double discount = 1.0;
  for (const auto& r : tr.steps) {
    ret += discount * objective_reward(r, kind);
    discount *= gamma;
  }
  return ret;
}

Eligibility eligibility(const AwarenessTrajectory& tr, const TwoTieredPolicy& policy) {
  Eligibility e{policy.inter().alpha, policy.ad().omega};
  e.alpha.setZero();
  e.omega.setZero();
  for (const auto& r : tr.steps) add_step_scores(r, policy, 1.0, e.alpha, e.omega);
  return e;
}

GradientEstimate estimate_gradients(std::span<const AwarenessTrajectory> batch,
                                    const TwoTieredPolicy& policy, const TrainerConfig& cfg,
                                    CriticState* critic) {
  check_batch(batch, policy);
  const double gamma = cfg.objective.gamma;
  const auto n = static_cast<double>(batch.size());

  GradientEstimate est;
  est.grad_alpha = Eigen::MatrixXd::Zero(policy.inter().alpha.rows(), policy.inter().alpha.cols());
  est.grad_omega = Eigen::MatrixXd::Zero(policy.ad().omega.rows(), policy.ad().omega.cols());
  est.batch_size = batch.size();

  std::vector<double> returns;
  returns.reserve(batch.size());
  for (const auto& tr : batch) returns.push_back(discounted_return(tr, cfg.kind, gamma));
  double mean_return = 0.0;
  for (double r : returns) mean_return += r;
  mean_return /= n;
  est.batch_return_mean = mean_return;

  if (cfg.mode == GradientMode::vanilla) {
    const double b = cfg.baseline ? mean_return : 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const double weight = returns[i] - b;
      if (weight == 0.0) continue;
      const Eligibility e = eligibility(batch[i], policy);
      est.grad_alpha.noalias() += weight * e.alpha;
      est.grad_omega.noalias() += weight * e.omega;
    }
    est.grad_alpha /= n;
    est.grad_omega /= n;
    return est;
  }

  if (critic == nullptr) throw std::invalid_argument("actor-critic mode needs a critic");
  const auto m = static_cast<Eigen::Index>(policy.ad_map().dim());
  if (critic->value_weights.size() != m)
    throw std::invalid_argument("critic weights do not match the state features");

  Eigen::VectorXd td_accum = Eigen::VectorXd::Zero(m);
  std::size_t transitions = 0;
  std::vector<Eigen::VectorXd> psi;
  for (const auto& tr : batch) {
    const std::size_t h_len = tr.steps.size();
    psi.resize(h_len);
    std::vector<double> value(h_len);
    for (std::size_t h = 0; h < h_len; ++h) {
      psi[h] = policy.ad_map()(tr.steps[h].observation);
      value[h] = critic->value_weights.dot(psi[h]);
    }
    double to_go = 0.0;
    for (std::size_t h = h_len; h-- > 0;) {
      const auto& r = tr.steps[h];
      const double rew = objective_reward(r, cfg.kind);
      to_go = rew + gamma * to_go;
      add_step_scores(r, policy, to_go - value[h], est.grad_alpha, est.grad_omega);

      const double next_v = (r.terminal || h + 1 == h_len) ? 0.0 : value[h + 1];
      td_accum.noalias() += (rew + gamma * next_v - value[h]) * psi[h];
    }
    transitions += h_len;
  }
  est.grad_alpha /= n;
  est.grad_omega /= n;
  critic->value_weights.noalias() += (critic->critic_step / static_cast<double>(transitions)) * td_accum;
  return est;
}

Eigen::VectorXd project(const Eigen::VectorXd& params, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("projection radius must be positive");
  const double norm = params.norm();
  if (norm <= radius) return params;
  return params * (radius / norm);
}

Eigen::MatrixXd project(const Eigen::MatrixXd& params, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("projection radius must be positive");
  const double norm = params.norm();
  if (norm <= radius) return params;
  return params * (radius / norm);
}

EpisodeRecord summarize_episode(std::uint64_t episode, const AwarenessTrajectory& tr,
                                const PgSmdpConfig& cfg, std::size_t num_options) {
  EpisodeRecord rec;
  rec.episode = episode;
  rec.base_return = tr.base_return();
  rec.pg_return = tr.pg_return();
  rec.length = tr.length();
  rec.success = !tr.steps.empty() && tr.steps.back().z_next.eta >= cfg.zeta;
  rec.event = tr.event;
  rec.option_counts.assign(num_options, 0);
  for (const auto& r : tr.steps) ++rec.option_counts[static_cast<std::size_t>(r.option_id)];
  return rec;
}

CriticState make_critic(const TwoTieredPolicy& policy) {
  return CriticState{Eigen::VectorXd::Zero(static_cast<Eigen::Index>(policy.ad_map().dim())), 0.0};
}

namespace {

/// One of the two decoupled parameter channels: its own step sequence and
/// projection ball.
struct UpdateChannel {
  Eigen::MatrixXd* params;
  double radius;
  bool enabled;

  void step(const Eigen::MatrixXd& grad, double step_size) const {
    if (!enabled) return;
    *params = project(Eigen::MatrixXd(*params + step_size * grad), radius);
  }
};

void collect_batch(const Environment& env, const TwoTieredPolicy& policy, const PgSmdpConfig& cfg,
                   const std::vector<std::uint64_t>& seeds, std::size_t workers,
                   std::vector<AwarenessTrajectory>& out) {
  out.assign(seeds.size(), {});
  auto run = [&](std::size_t i) {
    Rng local(seeds[i]);
    out[i] = rollout(env, policy, cfg, local);
  };
  if (workers <= 1 || seeds.size() <= 1) {
    for (std::size_t i = 0; i < seeds.size(); ++i) run(i);
    return;
  }
  std::vector<std::jthread> pool;
  const std::size_t w = std::min(workers, seeds.size());
  for (std::size_t t = 0; t < w; ++t)
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < seeds.size(); i += w) run(i);
    });
}

}  // namespace

TrainResult train(const Environment& env, TrainState init, const StepSchedule& schedule,
                  const TrainerConfig& cfg, std::uint64_t episodes, Rng& rng,
                  const TrainHooks& hooks) {
  cfg.objective.validate();
  if (auto bad = validate_schedule(schedule)) throw std::invalid_argument("invalid schedule: " + *bad);
  if (cfg.batch_size == 0) throw std::invalid_argument("batch size must be positive");
  if (init.k < 1) throw std::invalid_argument("schedule index starts at 1");

  TrainResult result{std::move(init), {}};
  TrainState& st = result.state;
  TwoTieredPolicy& policy = st.policy;
  if (cfg.mode == GradientMode::actor_critic &&
      st.critic.value_weights.size() != static_cast<Eigen::Index>(policy.ad_map().dim()))
    st.critic = make_critic(policy);

  const UpdateChannel alpha_channel{&policy.inter().alpha, cfg.alpha_radius, cfg.learn_alpha};
  const UpdateChannel omega_channel{&policy.ad().omega, cfg.omega_radius, cfg.learn_omega};

  const auto t0 = std::chrono::steady_clock::now();
  const Environment& probe_env = hooks.probe_env ? *hooks.probe_env : env;
  std::vector<AwarenessTrajectory> batch;
  std::uint64_t remaining = episodes;

  while (remaining > 0) {
    const auto n = static_cast<std::size_t>(std::min<std::uint64_t>(cfg.batch_size, remaining));
    std::vector<std::uint64_t> seeds(n);
    for (auto& s : seeds) s = rng();

    if (hooks.oracle_gradient) {
      batch.clear();
    } else {
      collect_batch(env, policy, cfg.objective, seeds, cfg.workers, batch);
    }

    std::vector<ProbeRow> probe_rows;
    if (!hooks.probes.empty())
      probe_rows = probe_ad_means(probe_env, policy, hooks.probes, cfg.objective.horizon);
    const double a_norm = policy.inter().alpha.norm();
    const double o_norm = policy.ad().omega.norm();
    if (a_norm > cfg.alpha_radius * (1.0 + 1e-12) || o_norm > cfg.omega_radius * (1.0 + 1e-12))
      throw std::logic_error("parameters escaped their projection ball");

    for (std::size_t i = 0; i < batch.size(); ++i) {
      EpisodeRecord rec = summarize_episode(st.episodes_done + i, batch[i], cfg.objective,
                                            policy.num_options());
      rec.ad_mean_probes = probe_rows;
      rec.alpha_norm = a_norm;
      rec.omega_norm = o_norm;
      if (hooks.record_wall_time)
        rec.wall_time =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      if (hooks.on_episode) hooks.on_episode(rec);
      if (hooks.keep_log) result.log.push_back(std::move(rec));
    }

    const double a_k = schedule.a(st.k);
    const double b_k = schedule.b(st.k);
    if (!(b_k > a_k)) throw std::logic_error("two-timescale ordering violated");
    st.critic.critic_step = cfg.critic_scale * b_k;

    GradientEstimate g = hooks.oracle_gradient
                             ? hooks.oracle_gradient(policy)
                             : estimate_gradients(batch, policy, cfg, &st.critic);
    if (!all_finite(g.grad_alpha) || !all_finite(g.grad_omega) ||
        !st.critic.value_weights.allFinite())
      throw NumericalError("non-finite gradient at iteration k=" + std::to_string(st.k) +
                           " (episode " + std::to_string(st.episodes_done) + ")");

    alpha_channel.step(g.grad_alpha, a_k);
    omega_channel.step(g.grad_omega, b_k);

    ++st.k;
    st.episodes_done += hooks.oracle_gradient ? n : batch.size();
    remaining -= n;
  }
  return result;
}

TrainResult sap_train(const Environment& env, const TwoTieredPolicy& policy_init,
                      const StepSchedule& schedule, TrainerConfig cfg, std::uint64_t episodes,
                      Rng& rng, const TrainHooks& hooks) {
  cfg.kind = ObjectiveKind::pg_smdp;
  TrainState init{policy_init, make_critic(policy_init), 1, 0};
  return train(env, std::move(init), schedule, cfg, episodes, rng, hooks);
}

TrainResult er_train(const Environment& env, const TwoTieredPolicy& policy_init,
                     const StepSchedule& schedule, TrainerConfig cfg, std::uint64_t episodes,
                     Rng& rng, const TrainHooks& hooks) {
  cfg.kind = ObjectiveKind::expected_return;
  TrainState init{policy_init, make_critic(policy_init), 1, 0};
  return train(env, std::move(init), schedule, cfg, episodes, rng, hooks);
}

}  // namespace sap
