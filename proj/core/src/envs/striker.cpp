#include "sap/envs/striker.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace sap {
namespace {

enum Coord { kAx = 0, kAy = 1, kBx = 2, kBy = 3, kKy = 4 };

double dist(double x0, double y0, double x1, double y1) { return std::hypot(x1 - x0, y1 - y0); }

/// Moves (x, y) towards (tx, ty) by at most `step`.
void approach(double& x, double& y, double tx, double ty, double step) {
  const double d = dist(x, y, tx, ty);
  if (d <= step) {
    x = tx;
    y = ty;
    return;
  }
  x += (tx - x) / d * step;
  y += (ty - y) / d * step;
}

}  // namespace

std::string to_string(Scenario s) { return s == Scenario::winning ? "winning" : "losing"; }

Scenario scenario_from_string(const std::string& s) {
  if (s == "winning") return Scenario::winning;
  if (s == "losing") return Scenario::losing;
  throw std::invalid_argument("unknown scenario '" + s + "' (expected winning or losing)");
}

void StrikerConfig::validate() const {
  if (!field.valid() || !box.valid() || !start_region.valid())
    throw std::invalid_argument("striker field, box and start region must be non-empty");
  if (!(goal_y1 > goal_y0)) throw std::invalid_argument("striker goal mouth is empty");
  if (!(agent_speed > 0.0) || !(control_radius > 0.0) || !(kick_per_power >= 0.0))
    throw std::invalid_argument("striker speeds and radii must be positive");
  if (!(power_bounds.hi > power_bounds.lo)) throw std::invalid_argument("striker power bounds are empty");
  if (!(keeper_speed >= 0.0) || !(capture_radius >= 0.0) || !(keeper_reach > 0.0))
    throw std::invalid_argument("striker keeper parameters must be non-negative");
  for (double p : {dribble_capture, loose_capture, shot_max})
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("striker probabilities must lie in [0, 1]");
  if (!(shot_scale > 0.0) || !(shot_range > 0.0))
    throw std::invalid_argument("striker shot_scale and shot_range must be positive");
  if (!(r_move > 0.0)) throw std::invalid_argument("r_move must be positive");
  if (!(r_dribble_far > 0.0) || !(r_shoot_near > 0.0))
    throw std::invalid_argument("r_dribble_far and r_shoot_near must be positive");
  if (!(r_dribble_near < 0.0) || !(r_shoot_far < 0.0))
    throw std::invalid_argument("r_dribble_near and r_shoot_far must be negative");
  if (!(r_score > 0.0)) throw std::invalid_argument("r_score is a magnitude and must be positive");
}

StrikerEnv::StrikerEnv(StrikerConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  const char* names[] = {"M", "S", "D"};
  for (int i = 0; i < 3; ++i) {
    SituationallyAwareOption o;
    o.id = i;
    o.name = names[i];
    o.termination = [](const AugmentedState&) { return 1.0; };
    o.ap_bounds = cfg_.power_bounds;
    o.ap_offset = cfg_.power_offset;
    o.uses_ap = i == dribble;
    options_.push_back(std::move(o));
  }
  const double cr = cfg_.control_radius;
  const double gx = cfg_.field.x1;
  const double gy = 0.5 * (cfg_.goal_y0 + cfg_.goal_y1);
  const double range = cfg_.shot_range;
  auto holds = [cr](const AugmentedState& z) {
    const auto& c = z.base.coords;
    return dist(c[kAx], c[kAy], c[kBx], c[kBy]) <= cr;
  };
  options_[shoot].initiation = [holds, gx, gy, range](const AugmentedState& z) {
    const auto& c = z.base.coords;
    return holds(z) && dist(c[kBx], c[kBy], gx, gy) <= range;
  };
  options_[dribble].initiation = holds;
}

std::vector<std::string> StrikerEnv::variables() const {
  return {"x", "y", "ball_x", "ball_y", "dist_goal", "possession", "keeper_y"};
}

void StrikerEnv::observe(const EnvState& s, std::span<double> out) const {
  const auto& c = s.coords;
  out[0] = c[kAx];
  out[1] = c[kAy];
  out[2] = c[kBx];
  out[3] = c[kBy];
  out[4] = dist(c[kAx], c[kAy], cfg_.field.x1, 0.5 * (cfg_.goal_y0 + cfg_.goal_y1));
  out[5] = has_ball(s) ? 1.0 : 0.0;
  out[6] = c[kKy];
}

EnvState StrikerEnv::reset(Rng& rng) const {
  std::uniform_real_distribution<double> ux(cfg_.start_region.x0, cfg_.start_region.x1);
  std::uniform_real_distribution<double> uy(cfg_.start_region.y0, cfg_.start_region.y1);
  const double x = ux(rng);
  const double y = uy(rng);
  return EnvState{{x, y, x, y, 0.5 * (cfg_.goal_y0 + cfg_.goal_y1)}, to_string(cfg_.scenario)};
}

bool StrikerEnv::has_ball(const EnvState& s) const {
  const auto& c = s.coords;
  return dist(c[kAx], c[kAy], c[kBx], c[kBy]) <= cfg_.control_radius;
}

bool StrikerEnv::ball_near(const EnvState& s) const {
  return cfg_.box.contains(s.coords[kBx], s.coords[kBy]);
}

double StrikerEnv::ball_goal_distance(const EnvState& s) const {
  return dist(s.coords[kBx], s.coords[kBy], cfg_.field.x1, 0.5 * (cfg_.goal_y0 + cfg_.goal_y1));
}

double StrikerEnv::shot_probability(const EnvState& s) const {
  const double d = ball_goal_distance(s) / cfg_.shot_scale;
  return cfg_.shot_max * std::exp(-d * d);
}

double StrikerEnv::keeper_proximity(double bx, double by, double ky) const {
  const double d = dist(bx, by, cfg_.keeper_x, ky) / cfg_.keeper_reach;
  return std::exp(-d * d);
}

double StrikerEnv::option_reward(const EnvState& s, int option) const {
  switch (option) {
    case move: return cfg_.r_move;
    case shoot: return ball_near(s) ? cfg_.r_shoot_near : cfg_.r_shoot_far;
    case dribble: return ball_near(s) ? cfg_.r_dribble_near : cfg_.r_dribble_far;
    default: throw std::out_of_range("striker option id out of range");
  }
}

StepResult StrikerEnv::step(const EnvState& s, int option, double ap, Rng& rng) const {
  if (option < 0 || option > 2) throw std::out_of_range("striker option id out of range");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> c = s.coords;
  const bool possession = has_ball(s);
  const double gx = cfg_.field.x1;
  const double gy = 0.5 * (cfg_.goal_y0 + cfg_.goal_y1);

  StepResult out{EnvState{{}, s.scenario_tag}, cfg_.signed_score_reward(), false, "step"};

  if (option == move || !possession) {
    // M, or a ball-less D/S (which degrade to chasing the ball).
    if (option == move) {
      const double before = dist(c[kAx], c[kAy], c[kBx], c[kBy]);
      approach(c[kAx], c[kAy], c[kBx], c[kBy], cfg_.agent_speed);
      const double after = dist(c[kAx], c[kAy], c[kBx], c[kBy]);
      if (possession || after < before) out.reward += cfg_.r_move;
    } else if (option == dribble) {
      approach(c[kAx], c[kAy], c[kBx], c[kBy], cfg_.agent_speed);
    }
  } else if (option == shoot) {
    out.reward += option_reward(s, shoot);
    out.terminal = true;
    if (unit(rng) < shot_probability(s)) {
      out.reward += cfg_.goal_reward;
      out.event = "goal";
      c[kBx] = gx;
      c[kBy] = gy;
    } else {
      out.event = "captured";
      c[kBx] = cfg_.keeper_x;
      c[kBy] = c[kKy];
    }
    out.next.coords = std::move(c);
    return out;
  } else {
    out.reward += option_reward(s, dribble);
    const double power = cfg_.power_bounds.clamp(ap);
    const double kick = cfg_.kick_per_power * power;
    approach(c[kBx], c[kBy], gx, gy, kick);
    c[kBx] = std::min(c[kBx], cfg_.keeper_x);
    c[kAx] = c[kBx];
    c[kAy] = c[kBy];
    const double frac = power / cfg_.power_bounds.hi;
    const double p = cfg_.dribble_capture * frac * frac * keeper_proximity(c[kBx], c[kBy], c[kKy]);
    if (unit(rng) < p) {
      out.terminal = true;
      out.event = "captured";
    }
  }

  // Keeper tracks the ball along its line.
  if (!out.terminal) {
    const double target = std::clamp(c[kBy], cfg_.goal_y0, cfg_.goal_y1);
    c[kKy] += std::clamp(target - c[kKy], -cfg_.keeper_speed, cfg_.keeper_speed);
    const bool loose = dist(c[kAx], c[kAy], c[kBx], c[kBy]) > cfg_.control_radius;
    const double kd = dist(c[kBx], c[kBy], cfg_.keeper_x, c[kKy]);
    if (kd <= cfg_.capture_radius ||
        (loose && unit(rng) < cfg_.loose_capture * keeper_proximity(c[kBx], c[kBy], c[kKy]))) {
      out.terminal = true;
      out.event = "captured";
    }
  }
  out.next.coords = std::move(c);
  return out;
}

}  // namespace sap
