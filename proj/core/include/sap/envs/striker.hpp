#pragma once

// Simplified striker against a goal-line keeper. One attacker with options
// MoveToBall (M), Shoot (S) and Dribble (D); D carries the dribble power AP.

#include <string>
#include <vector>

#include "sap/envs/bpod.hpp"
#include "sap/pg_smdp.hpp"

namespace sap {

enum class Scenario { winning, losing };

std::string to_string(Scenario s);
Scenario scenario_from_string(const std::string& s);

struct StrikerConfig {
  Scenario scenario = Scenario::losing;
  Rect field{0.0, 0.0, 1.0, 1.0};
  /// Goal mouth on the line x = field.x1.
  double goal_y0 = 0.4;
  double goal_y1 = 0.6;
  /// Ball positions inside the box count as "near".
  Rect box{0.75, 0.2, 1.0, 0.8};
  Rect start_region{0.3, 0.4, 0.4, 0.6};

  double agent_speed = 0.03;
  double control_radius = 0.02;
  /// Ball travel per dribble step = kick_per_power * power.
  double kick_per_power = 0.0004;
  ApBounds power_bounds{0.0, 150.0};
  /// Resting dribble power for a zero AD mean.
  double power_offset = 75.0;

  double keeper_x = 0.97;
  double keeper_speed = 0.02;
  double capture_radius = 0.05;
  /// Interception chance per step scales with exp(-(d / keeper_reach)^2).
  double keeper_reach = 0.25;
  double dribble_capture = 0.3;
  double loose_capture = 0.5;

  /// Shot success chance shot_max * exp(-(d / shot_scale)^2), d = ball to
  /// goal centre.
  double shot_max = 0.9;
  double shot_scale = 0.25;
  /// Shoot may start only with the ball within this distance of the goal.
  double shot_range = 0.45;

  double r_move = 0.01;
  double r_dribble_far = 0.025;
  double r_dribble_near = -0.05;
  double r_shoot_near = 0.1;
  double r_shoot_far = -0.1;
  /// Magnitude of the per-step score reward; the sign follows the scenario.
  double r_score = 0.02;
  double goal_reward = 5.0;

  double signed_score_reward() const { return scenario == Scenario::winning ? r_score : -r_score; }
  void validate() const;
};

/// coords = [agent_x, agent_y, ball_x, ball_y, keeper_y].
class StrikerEnv final : public Environment {
 public:
  enum Option { move = 0, shoot = 1, dribble = 2 };

  explicit StrikerEnv(StrikerConfig cfg);

  std::string name() const override { return "striker"; }
  const std::vector<SituationallyAwareOption>& options() const override { return options_; }
  /// x, y, ball_x, ball_y, dist_goal, possession, keeper_y.
  std::vector<std::string> variables() const override;
  void observe(const EnvState& s, std::span<double> out) const override;
  EnvState reset(Rng& rng) const override;
  StepResult step(const EnvState& s, int option, double ap, Rng& rng) const override;

  const StrikerConfig& config() const { return cfg_; }

  bool has_ball(const EnvState& s) const;
  bool ball_near(const EnvState& s) const;
  double ball_goal_distance(const EnvState& s) const;
  double shot_probability(const EnvState& s) const;
  /// Reward of the option-specific component alone (no score reward), for a
  /// state with possession. Used by the sign-table tests.
  double option_reward(const EnvState& s, int option) const;

 private:
  double keeper_proximity(double bx, double by, double ky) const;

  StrikerConfig cfg_;
  std::vector<SituationallyAwareOption> options_;
};

}  // namespace sap
