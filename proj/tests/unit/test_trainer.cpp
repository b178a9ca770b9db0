#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "sap/experiment.hpp"
#include "sap/oracle.hpp"
#include "sap/rollout.hpp"
#include "sap/schedule.hpp"
#include "sap/trainer.hpp"
#include "support.hpp"

namespace sap {
namespace {

// Exact values from an independent arbitrary-precision evaluation of the
// bandit in support.hpp. Parameter order: alpha row-major, then omega.
constexpr double kErValue = 1.0283552713995081;
constexpr double kErGrad[8] = {-0.043937743998474113, -0.080953036003293991, 0.043937743998474113,
                               0.080953036003293991,  0.049862268061516213,  0.11882356370250025,
                               -0.05175510318344291,  0.00073901895722492596};
constexpr double kPgValue = 0.29114402367801586;
constexpr double kPgGrad[8] = {-0.051689593097131683, -0.078000765621128973, 0.051689593097131683,
                               0.078000765621128973,  -0.042642257617682728, -0.016071721810209747,
                               -0.041283929190623127, -0.06816219372170282};

Eigen::VectorXd flatten(const BanditObjective& o) {
  Eigen::VectorXd v(8);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      v[2 * i + j] = o.grad_alpha(i, j);
      v[4 + 2 * i + j] = o.grad_omega(i, j);
    }
  return v;
}

struct BanditFixture : ::testing::Test {
  Experiment ex = build_experiment(test::oracle_bandit_config());
  const BanditEnv& env() const { return static_cast<const BanditEnv&>(*ex.train_env); }
  void SetUp() override { test::set_oracle_params(ex.policy); }
};

TEST_F(BanditFixture, ExactObjectiveMatchesFrozenOracle) {
  const BanditObjective er = bandit_objective(env(), ex.policy, ObjectiveKind::expected_return, 0.0);
  EXPECT_NEAR(er.value, kErValue, 1e-12);
  const Eigen::VectorXd ge = flatten(er);
  for (int i = 0; i < 8; ++i) EXPECT_NEAR(ge[i], kErGrad[i], 1e-12) << i;

  const BanditObjective pg = bandit_objective(env(), ex.policy, ObjectiveKind::pg_smdp, 1.5);
  EXPECT_NEAR(pg.value, kPgValue, 1e-12);
  const Eigen::VectorXd gp = flatten(pg);
  for (int i = 0; i < 8; ++i) EXPECT_NEAR(gp[i], kPgGrad[i], 1e-12) << i;
}

TEST_F(BanditFixture, ContextValuesAverageToObjective) {
  const double v0 = bandit_context_value(env(), ex.policy, 0, ObjectiveKind::pg_smdp, 1.5);
  const double v1 = bandit_context_value(env(), ex.policy, 1, ObjectiveKind::pg_smdp, 1.5);
  EXPECT_NEAR(0.4 * v0 + 0.6 * v1, kPgValue, 1e-12);
}

TEST_F(BanditFixture, SampledGradientIsUnbiased) {
  // Large batch from the real rollout path against the exact gradient.
  std::vector<AwarenessTrajectory> batch;
  Rng rng(11);
  const int n = 40000;
  for (int i = 0; i < n; ++i) batch.push_back(rollout(*ex.train_env, ex.policy, ex.config.trainer.objective, rng));
  TrainerConfig cfg = ex.config.trainer;
  const GradientEstimate g = estimate_gradients(batch, ex.policy, cfg);
  // Per-coordinate standard errors from the per-trajectory terms.
  Eigen::MatrixXd sa = Eigen::MatrixXd::Zero(2, 2), so = sa;
  for (const auto& tr : batch) {
    const Eligibility e = eligibility(tr, ex.policy);
    const double R = discounted_return(tr, cfg.kind, 1.0);
    sa += (R * e.alpha - g.grad_alpha).cwiseAbs2();
    so += (R * e.omega - g.grad_omega).cwiseAbs2();
  }
  sa = (sa / (n - 1.0) / n).cwiseSqrt();
  so = (so / (n - 1.0) / n).cwiseSqrt();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      EXPECT_LT(std::abs(g.grad_alpha(i, j) - kPgGrad[2 * i + j]), 4.5 * sa(i, j));
      EXPECT_LT(std::abs(g.grad_omega(i, j) - kPgGrad[4 + 2 * i + j]), 4.5 * so(i, j));
    }
  EXPECT_NEAR(g.batch_return_mean, kPgValue, 0.01);
}

TEST_F(BanditFixture, ZeroReturnsGiveZeroGradients) {
  ex.config.bandit.rewards = {{{0, 0, 0, 0, 0}, {0, 0, 0, 0, 0}}, {{0, 0, 0, 0, 0}, {0, 0, 0, 0, 0}}};
  Experiment zero = build_experiment(ex.config);
  test::set_oracle_params(zero.policy);
  Rng rng(2);
  std::vector<AwarenessTrajectory> batch;
  for (int i = 0; i < 20; ++i) batch.push_back(rollout(*zero.train_env, zero.policy, zero.config.trainer.objective, rng));
  for (bool baseline : {false, true}) {
    TrainerConfig cfg = zero.config.trainer;
    cfg.baseline = baseline;
    const GradientEstimate g = estimate_gradients(batch, zero.policy, cfg);
    EXPECT_TRUE(g.grad_alpha.isZero(0.0));
    EXPECT_TRUE(g.grad_omega.isZero(0.0));
  }
}

TEST_F(BanditFixture, SingleWinningStepGivesTheScore) {
  ex.config.bandit.rewards = {{{2, 2, 2, 2, 2}, {2, 2, 2, 2, 2}}, {{2, 2, 2, 2, 2}, {2, 2, 2, 2, 2}}};
  Experiment win = build_experiment(ex.config);
  test::set_oracle_params(win.policy);
  Rng rng(5);
  const std::vector<AwarenessTrajectory> batch{rollout(*win.train_env, win.policy, win.config.trainer.objective, rng)};
  ASSERT_EQ(batch[0].pg_return(), 1.0);
  const TransitionRecord& r = batch[0].steps[0];
  const Eigen::VectorXd phi = win.policy.inter_map()(r.observation);
  const Eigen::VectorXd psi = win.policy.ad_map()(r.observation);
  const GradientEstimate g = estimate_gradients(batch, win.policy, win.config.trainer);
  EXPECT_TRUE(g.grad_alpha.isApprox(log_prob_grad_alpha(win.policy.inter(), phi, r.option_id, r.available)));
  EXPECT_TRUE(g.grad_omega.isApprox(log_prob_grad_omega(win.policy.ad(), psi, r.option_id, r.raw_ap)));
}

TEST_F(BanditFixture, ActorCriticNeedsCriticAndIsFinite) {
  TrainerConfig cfg = ex.config.trainer;
  cfg.mode = GradientMode::actor_critic;
  Rng rng(9);
  std::vector<AwarenessTrajectory> batch;
  for (int i = 0; i < 10; ++i) batch.push_back(rollout(*ex.train_env, ex.policy, cfg.objective, rng));
  EXPECT_THROW(estimate_gradients(batch, ex.policy, cfg), std::invalid_argument);
  CriticState critic = make_critic(ex.policy);
  critic.critic_step = 0.1;
  const GradientEstimate g = estimate_gradients(batch, ex.policy, cfg, &critic);
  EXPECT_TRUE(g.grad_alpha.allFinite());
  EXPECT_TRUE(g.grad_omega.allFinite());
  EXPECT_FALSE(critic.value_weights.isZero(0.0));
  EXPECT_THROW(estimate_gradients({}, ex.policy, cfg, &critic), std::invalid_argument);
}

TEST_F(BanditFixture, ExactGradientAscentImprovesObjective) {
  const double before = bandit_objective(env(), ex.policy, ObjectiveKind::pg_smdp, 1.5).value;
  TrainHooks hooks;
  hooks.oracle_gradient = [&](const TwoTieredPolicy& p) {
    const BanditObjective o = bandit_objective(env(), p, ObjectiveKind::pg_smdp, 1.5);
    return GradientEstimate{o.grad_alpha, o.grad_omega, o.value, 0};
  };
  StepSchedule s;
  s.a0 = 1.0;
  s.b0 = 2.0;
  Rng rng(1);
  TrainState init{ex.policy, make_critic(ex.policy), 1, 0};
  const TrainResult r = train(*ex.train_env, init, s, ex.config.trainer, 2000, rng, hooks);
  const double after = bandit_objective(env(), r.state.policy, ObjectiveKind::pg_smdp, 1.5).value;
  EXPECT_GT(after, before + 0.1);
  EXPECT_EQ(r.state.episodes_done, 2000u);
  EXPECT_EQ(r.state.k, 201u);
}

TEST_F(BanditFixture, NonFiniteGradientAborts) {
  TrainHooks hooks;
  hooks.oracle_gradient = [](const TwoTieredPolicy& p) {
    GradientEstimate g;
    g.grad_alpha = Eigen::MatrixXd::Constant(p.inter().alpha.rows(), p.inter().alpha.cols(),
                                             std::numeric_limits<double>::quiet_NaN());
    g.grad_omega = Eigen::MatrixXd::Zero(p.ad().omega.rows(), p.ad().omega.cols());
    return g;
  };
  Rng rng(1);
  TrainState init{ex.policy, make_critic(ex.policy), 1, 0};
  EXPECT_THROW(train(*ex.train_env, init, ex.config.schedule, ex.config.trainer, 10, rng, hooks),
               NumericalError);
}

TEST_F(BanditFixture, ZeroRewardLeavesParametersUnchanged) {
  ex.config.bandit.rewards = {{{0, 0, 0, 0, 0}, {0, 0, 0, 0, 0}}, {{0, 0, 0, 0, 0}, {0, 0, 0, 0, 0}}};
  Experiment zero = build_experiment(ex.config);
  test::set_oracle_params(zero.policy);
  Rng rng(4);
  const TrainResult r = sap_train(*zero.train_env, zero.policy, zero.config.schedule,
                                  zero.config.trainer, 500, rng);
  EXPECT_EQ(r.state.policy.inter().alpha, zero.policy.inter().alpha);
  EXPECT_EQ(r.state.policy.ad().omega, zero.policy.ad().omega);
  EXPECT_EQ(r.log.size(), 500u);
}

TEST(Trainer, TwoArmedBanditLearnsWinningOption) {
  ExperimentConfig c = test::oracle_bandit_config();
  c.bandit.context_x = {0.0};
  c.bandit.context_prob = {1.0};
  c.bandit.rewards = {{{0, 0, 0, 0, 0}, {1, 1, 1, 1, 1}}};
  c.inter_features.terms = {"1"};
  c.ad_features.terms = {"1"};
  c.zeta = 1.0;
  c.trainer.objective.zeta = 1.0;
  c.trainer.baseline = true;
  c.schedule.a0 = 2.0;
  c.schedule.b0 = 4.0;
  const Experiment ex = build_experiment(c);
  Rng rng(1);
  const TrainResult r = sap_train(*ex.train_env, ex.policy, c.schedule, c.trainer, 5000, rng);
  const Eigen::VectorXd phi = Eigen::VectorXd::Ones(1);
  EXPECT_GT(option_probabilities(r.state.policy.inter(), phi)[1], 0.95);
}

TEST(Trainer, WorkerCountDoesNotChangeResults) {
  ExperimentConfig c = load_config(test::preset("bpod-sap"));
  c.episodes = 200;
  const Experiment ex = build_experiment(c);
  TrainerConfig cfg = c.trainer;
  Rng r1(3), r3(3);
  const TrainResult one = train(*ex.train_env, {ex.policy, make_critic(ex.policy), 1, 0}, c.schedule, cfg, 200, r1);
  cfg.workers = 3;
  const TrainResult three = train(*ex.train_env, {ex.policy, make_critic(ex.policy), 1, 0}, c.schedule, cfg, 200, r3);
  EXPECT_EQ(one.state.policy.inter().alpha, three.state.policy.inter().alpha);
  EXPECT_EQ(one.state.policy.ad().omega, three.state.policy.ad().omega);
  ASSERT_EQ(one.log.size(), three.log.size());
  for (std::size_t i = 0; i < one.log.size(); ++i) EXPECT_EQ(one.log[i].base_return, three.log[i].base_return);
}

TEST(Projection, InteriorAndScaling) {
  Eigen::VectorXd v(2);
  v << 1.0, 2.0;
  EXPECT_EQ(project(v, 5.0), v);
  v << 6.0, 8.0;
  const Eigen::VectorXd p = project(v, 5.0);
  EXPECT_NEAR(p[0], 3.0, 1e-15);
  EXPECT_NEAR(p[1], 4.0, 1e-15);
  Eigen::MatrixXd m(2, 2);
  m << 3, 4, 0, 0;
  EXPECT_NEAR(project(m, 1.0).norm(), 1.0, 1e-15);
}

TEST(Schedule, ValidationCases) {
  StepSchedule ok;
  ok.kind = ScheduleKind::inverse_k_power;
  ok.a0 = 1.0;
  ok.b0 = 2.0;
  ok.power_a = 1.0;
  ok.power_b = 0.6;
  EXPECT_FALSE(validate_schedule(ok).has_value());

  StepSchedule sqrt_a = ok;
  sqrt_a.power_a = 0.5;
  EXPECT_TRUE(validate_schedule(sqrt_a).has_value());

  StepSchedule same = ok;
  same.b0 = ok.a0;
  same.power_b = ok.power_a;
  EXPECT_TRUE(validate_schedule(same).has_value());

  StepSchedule summable = ok;
  summable.power_b = 1.2;
  EXPECT_TRUE(validate_schedule(summable).has_value());

  StepSchedule smaller_b0 = ok;
  smaller_b0.b0 = 0.5;
  EXPECT_TRUE(validate_schedule(smaller_b0).has_value());

  StepSchedule ik = ok;
  ik.kind = ScheduleKind::inverse_k;
  EXPECT_FALSE(validate_schedule(ik).has_value());
  EXPECT_DOUBLE_EQ(ik.a(4), 0.25);
  EXPECT_DOUBLE_EQ(ik.b(4), 0.5);

  StepSchedule shifted = ok;
  shifted.offset = 10.0;
  EXPECT_DOUBLE_EQ(shifted.a(10), 1.0 / 20.0);

  EXPECT_EQ(schedule_kind_from_string(to_string(ScheduleKind::inverse_k)), ScheduleKind::inverse_k);
  EXPECT_THROW(schedule_kind_from_string("cosine"), std::invalid_argument);
}

TEST(Trainer, RejectsInvalidSchedule) {
  const Experiment ex = build_experiment(test::oracle_bandit_config());
  StepSchedule bad;
  bad.b0 = bad.a0;
  bad.power_b = bad.power_a;
  Rng rng(1);
  EXPECT_THROW(sap_train(*ex.train_env, ex.policy, bad, ex.config.trainer, 10, rng), std::invalid_argument);
}

TEST(Strings, Enums) {
  EXPECT_EQ(objective_kind_from_string("pg-smdp"), ObjectiveKind::pg_smdp);
  EXPECT_EQ(objective_kind_from_string("expected-return"), ObjectiveKind::expected_return);
  EXPECT_EQ(gradient_mode_from_string("actor-critic"), GradientMode::actor_critic);
  EXPECT_EQ(to_string(GradientMode::vanilla), "vanilla");
  EXPECT_THROW(objective_kind_from_string("max"), std::invalid_argument);
}

}  // namespace
}  // namespace sap
