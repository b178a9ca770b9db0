#pragma once

#include <vector>

#include "sap/pg_smdp.hpp"
#include "sap/policy.hpp"

namespace sap {

enum class ActionMode {
  sample,  // draw options and APs from the two-tiered policy
  greedy,  // argmax option, AP at the AD mean
};

/// Observation of z: env.observe(z.base) followed by eta and t / horizon.
std::vector<double> observe(const Environment& env, const AugmentedState& z, int horizon);

/// Runs one episode from env.reset() until the environment terminates or the
/// horizon is reached. Horizon expiry is tagged "out_of_time". The terminal
/// record carries the indicator reward evaluated at the termination state.
AwarenessTrajectory rollout(const Environment& env, const TwoTieredPolicy& policy,
                            const PgSmdpConfig& cfg, Rng& rng,
                            ActionMode mode = ActionMode::sample);

/// Same, but starting from a caller-supplied base state.
AwarenessTrajectory rollout_from(const Environment& env, const TwoTieredPolicy& policy,
                                 const PgSmdpConfig& cfg, EnvState start, Rng& rng,
                                 ActionMode mode = ActionMode::sample);

}  // namespace sap
