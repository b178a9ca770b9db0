#include "sap/envs/bandit.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace sap {

void BanditConfig::validate() const {
  if (context_x.empty() || context_x.size() != context_prob.size())
    throw std::invalid_argument("bandit contexts need one probability each");
  double total = 0.0;
  for (double p : context_prob) {
    if (!(p >= 0.0)) throw std::invalid_argument("negative context probability");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("context probabilities must sum to 1");
  if (num_options < 1) throw std::invalid_argument("bandit needs at least one option");
  if (bins < 1) throw std::invalid_argument("bandit needs at least one AP bin");
  if (!(ap_bounds.hi > ap_bounds.lo)) throw std::invalid_argument("bandit AP bounds are empty");
  if (rewards.size() != context_x.size()) throw std::invalid_argument("reward table context mismatch");
  for (const auto& ctx : rewards) {
    if (ctx.size() != static_cast<std::size_t>(num_options))
      throw std::invalid_argument("reward table option mismatch");
    for (const auto& row : ctx)
      if (row.size() != static_cast<std::size_t>(bins))
        throw std::invalid_argument("reward table bin mismatch");
  }
}

BanditEnv::BanditEnv(BanditConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  for (int o = 0; o < cfg_.num_options; ++o) {
    SituationallyAwareOption opt;
    opt.id = o;
    opt.name = "arm" + std::to_string(o);
    opt.ap_bounds = cfg_.ap_bounds;
    opt.ap_offset = cfg_.ap_offset;
    options_.push_back(std::move(opt));
  }
}

void BanditEnv::observe(const EnvState& s, std::span<double> out) const { out[0] = s.coords[0]; }

EnvState BanditEnv::context_state(int context) const {
  return EnvState{{cfg_.context_x[static_cast<std::size_t>(context)], static_cast<double>(context)},
                  "bandit"};
}

EnvState BanditEnv::reset(Rng& rng) const {
  if (cfg_.context_x.size() == 1) return context_state(0);
  std::discrete_distribution<int> pick(cfg_.context_prob.begin(), cfg_.context_prob.end());
  return context_state(pick(rng));
}

int BanditEnv::bin_of(double clamped_ap) const {
  const double u = (clamped_ap - cfg_.ap_bounds.lo) / cfg_.ap_bounds.width();
  const int b = static_cast<int>(std::floor(u * cfg_.bins));
  return b < 0 ? 0 : (b >= cfg_.bins ? cfg_.bins - 1 : b);
}

StepResult BanditEnv::step(const EnvState& s, int option, double ap, Rng&) const {
  const auto ctx = static_cast<std::size_t>(s.coords[1]);
  const double r =
      cfg_.rewards[ctx][static_cast<std::size_t>(option)][static_cast<std::size_t>(bin_of(ap))];
  return StepResult{s, r, true, "done"};
}

}  // namespace sap
