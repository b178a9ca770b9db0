#include "sap/envs/bpod.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace sap {
namespace {

constexpr double kWallGap = 1e-9;

bool overlaps(const Rect& a, const Rect& b) {
  return a.x0 < b.x1 && b.x0 < a.x1 && a.y0 < b.y1 && b.y0 < a.y1;
}

}  // namespace

std::vector<BpodOption> BpodConfig::default_options(double split_x) {
  BpodOption up_right{"up-right", {0.6, 0.0, 0.4, 0.0}, Rect{0.0, 0.0, split_x, 1.0}, {-0.05, 0.05}};
  BpodOption down_right{"down-right", {0.0, 0.5, 0.5, 0.0}, Rect{split_x, 0.0, 1.0, 1.0},
                        {-0.05, 0.05}};
  // The partition boundary belongs to the eastern option only.
  up_right.partition.x1 = std::nextafter(split_x, 0.0);
  return {up_right, down_right};
}

void BpodConfig::validate() const {
  if (!bounds.valid()) throw std::invalid_argument("bpod bounds are empty");
  if (!pit.valid() || !goal.valid() || !start_region.valid() || !eval_start_region.valid())
    throw std::invalid_argument("bpod pit, goal and start region must be non-empty rectangles");
  if (!(wall_y1 > wall_y0)) throw std::invalid_argument("bpod wall has no extent");
  if (pit.y0 < wall_y1) throw std::invalid_argument("bpod pit must sit above the wall");
  if (overlaps(pit, goal)) throw std::invalid_argument("bpod goal overlaps the pit");
  if (!(wind_mean > 0.0)) throw std::invalid_argument("bpod wind must blow east (wind_mean > 0)");
  if (!(wind_std >= 0.0)) throw std::invalid_argument("bpod wind_std must be >= 0");
  if (pit.contains(start_region.x0, start_region.y0) || goal.contains(start_region.x0, start_region.y0))
    throw std::invalid_argument("bpod start region begins inside the pit or goal");
  if (!(step_size > 0.0)) throw std::invalid_argument("bpod step_size must be positive");
  if (options.empty()) throw std::invalid_argument("bpod needs at least one option");
  for (const auto& o : options) {
    double total = 0.0;
    for (double p : o.action_distribution) {
      if (!(p >= 0.0)) throw std::invalid_argument("bpod option '" + o.name + "' has a negative probability");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-9)
      throw std::invalid_argument("bpod option '" + o.name + "' probabilities must sum to 1");
    if (!(o.east_ap_bounds.hi >= o.east_ap_bounds.lo))
      throw std::invalid_argument("bpod option '" + o.name + "' has empty AP bounds");
  }
}

BpodEnv::BpodEnv(BpodConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  for (std::size_t i = 0; i < cfg_.options.size(); ++i) {
    const Rect part = cfg_.options[i].partition;
    SituationallyAwareOption o;
    o.id = static_cast<int>(i);
    o.name = cfg_.options[i].name;
    o.initiation = [part](const AugmentedState& z) {
      return part.contains(z.base.coords[0], z.base.coords[1]);
    };
    o.termination = [](const AugmentedState&) { return 1.0; };
    o.ap_bounds = cfg_.options[i].east_ap_bounds;
    options_.push_back(std::move(o));
  }
}

void BpodEnv::observe(const EnvState& s, std::span<double> out) const {
  out[0] = s.coords[0];
  out[1] = s.coords[1];
}

EnvState BpodEnv::reset(Rng& rng) const {
  const Rect& r = eval_starts_ ? cfg_.eval_start_region : cfg_.start_region;
  std::uniform_real_distribution<double> ux(r.x0, r.x1);
  std::uniform_real_distribution<double> uy(r.y0, r.y1);
  const double x = ux(rng);
  const double y = uy(rng);
  return EnvState{{x, y}, "bpod"};
}

StepResult BpodEnv::step(const EnvState& s, int option, double ap, Rng& rng) const {
  const auto& opt = cfg_.options.at(static_cast<std::size_t>(option));
  std::discrete_distribution<int> pick(opt.action_distribution.begin(),
                                       opt.action_distribution.end());
  const auto action = static_cast<Primitive>(pick(rng));
  std::normal_distribution<double> gust(cfg_.wind_mean, cfg_.wind_std);
  const double wind = cfg_.wind_std > 0.0 ? gust(rng) : cfg_.wind_mean;
  return apply(s, action, opt.east_ap_bounds.clamp(ap), wind);
}

StepResult BpodEnv::apply(const EnvState& s, Primitive action, double ap, double wind) const {
  const double x = s.coords[0];
  const double y = s.coords[1];
  double dx = wind;
  double dy = 0.0;
  switch (action) {
    case Primitive::north: dy = cfg_.step_size; break;
    case Primitive::south: dy = -cfg_.step_size; break;
    case Primitive::east: dx += cfg_.step_size + ap; break;
    case Primitive::west: dx -= cfg_.step_size; break;
  }
  double nx = x + dx;
  double ny = std::clamp(y + dy, cfg_.bounds.y0, cfg_.bounds.y1);

  bool hit_wall = false;
  const bool crosses = (x < cfg_.wall_x && nx >= cfg_.wall_x) || (x > cfg_.wall_x && nx <= cfg_.wall_x);
  if (crosses) {
    const double frac = (cfg_.wall_x - x) / (nx - x);
    const double yc = y + frac * (ny - y);
    if (yc >= cfg_.wall_y0 && yc <= cfg_.wall_y1) {
      nx = x < cfg_.wall_x ? cfg_.wall_x - kWallGap : cfg_.wall_x + kWallGap;
      hit_wall = true;
    }
  }
  nx = std::clamp(nx, cfg_.bounds.x0, cfg_.bounds.x1);

  StepResult out{EnvState{{nx, ny}, s.scenario_tag}, 0.0, false, "step"};
  if (cfg_.pit.contains(nx, ny)) {
    out.reward = cfg_.pit_cost;
    out.terminal = true;
    out.event = "pit";
  } else if (cfg_.goal.contains(nx, ny)) {
    out.reward = cfg_.goal_reward;
    out.terminal = true;
    out.event = "goal";
  } else {
    // A collision step is charged the wall cost instead of the step cost.
    out.reward = hit_wall ? cfg_.wall_cost : cfg_.step_cost;
    if (hit_wall) out.event = "wall";
  }
  return out;
}

}  // namespace sap
