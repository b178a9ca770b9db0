#include "sap/probes.hpp"

#include <stdexcept>

#include "sap/rollout.hpp"

namespace sap {

std::vector<ProbeRow> probe_ad_means(const Environment& env, const TwoTieredPolicy& policy,
                                     const std::vector<ProbeState>& probes, int horizon,
                                     const std::string& only) {
  std::vector<ProbeRow> rows;
  bool found = only.empty();
  for (const auto& p : probes) {
    if (!only.empty() && p.label != only) continue;
    found = true;
    const auto obs = observe(env, p.z, horizon);
    const Eigen::VectorXd psi = policy.ad_map()(obs);
    for (std::size_t o = 0; o < policy.num_options(); ++o)
      rows.push_back({p.label, static_cast<int>(o), policy.ad_mean(static_cast<int>(o), psi)});
  }
  if (!found) throw std::invalid_argument("unknown probe '" + only + "'");
  return rows;
}

int owning_option(const Environment& env, const ProbeState& probe) {
  int owner = -1;
  for (const auto& o : env.options()) {
    if (!o.can_start(probe.z)) continue;
    if (owner >= 0) return -1;
    owner = o.id;
  }
  return owner;
}

}  // namespace sap
