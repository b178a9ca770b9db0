#include "sap/pg_smdp.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace sap {

void PgSmdpConfig::validate() const {
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in [0, 1]");
  if (!std::isfinite(zeta)) throw std::invalid_argument("zeta must be finite");
}

double SituationallyAwareOption::beta(const AugmentedState& z) const {
  if (!termination) return 1.0;
  const double b = termination(z);
  if (!(b > 0.0)) return 0.0;
  return b > 1.0 ? 1.0 : b;
}

double AwarenessTrajectory::base_return() const {
  double sum = 0.0;
  for (const auto& r : steps) sum += r.base_reward;
  return sum;
}

double AwarenessTrajectory::pg_return() const {
  double sum = 0.0;
  for (const auto& r : steps) sum += r.pg_reward;
  return sum;
}

void AwarenessTrajectory::check_invariants(const PgSmdpConfig& cfg) const {
  if (steps.size() > static_cast<std::size_t>(cfg.horizon))
    throw std::logic_error("trajectory longer than horizon");
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const auto& r = steps[i];
    if (r.z_next.eta != r.z.eta + r.base_reward)
      throw std::logic_error("eta bookkeeping broken at step " + std::to_string(i));
    if (r.z_next.t != r.z.t + 1)
      throw std::logic_error("time bookkeeping broken at step " + std::to_string(i));
    if (r.terminal != (i + 1 == steps.size()))
      throw std::logic_error("terminal flag misplaced at step " + std::to_string(i));
  }
}

AugmentedState augment_transition(const AugmentedState& z, double base_reward, EnvState s_next,
                                  int horizon) {
  if (!std::isfinite(base_reward)) throw std::invalid_argument("non-finite base reward");
  if (z.t >= horizon) throw std::invalid_argument("transition past the horizon");
  return AugmentedState{std::move(s_next), z.eta + base_reward, z.t + 1};
}

double pg_reward(const AugmentedState& z, const PgSmdpConfig& cfg) {
  return (z.t == cfg.horizon && z.eta >= cfg.zeta) ? 1.0 : 0.0;
}

double terminal_pg_reward(const AugmentedState& z, const PgSmdpConfig& cfg) {
  AugmentedState at_horizon{z.base, z.eta, cfg.horizon};
  return pg_reward(at_horizon, cfg);
}

double success_probability_estimate(std::span<const AwarenessTrajectory> trajectories,
                                    const PgSmdpConfig& cfg) {
  if (trajectories.empty()) throw std::invalid_argument("no trajectories");
  std::size_t hits = 0;
  double pg_sum = 0.0;
  for (const auto& tr : trajectories) {
    if (tr.base_return() >= cfg.zeta) ++hits;
    pg_sum += tr.pg_return();
  }
  const double n = static_cast<double>(trajectories.size());
  const double p = static_cast<double>(hits) / n;
  // Summing 0/1 values is exact, so the two routes must agree bit-for-bit.
  if (pg_sum / n != p)
    throw std::logic_error("indicator-return mean disagrees with success fraction");
  return p;
}

}  // namespace sap
