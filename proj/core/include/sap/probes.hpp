#pragma once

#include <string>
#include <vector>

#include "sap/pg_smdp.hpp"
#include "sap/policy.hpp"

namespace sap {

/// Named augmented state at which learned AD means are read out.
struct ProbeState {
  std::string label;
  AugmentedState z;
};

struct ProbeRow {
  std::string label;
  int option = 0;
  double mean = 0.0;  // psi(z) . w_option
};

/// One row per (probe, option), probes in the given order. When `only`
/// is non-empty just that probe is evaluated; an unknown label throws
/// std::invalid_argument.
std::vector<ProbeRow> probe_ad_means(const Environment& env, const TwoTieredPolicy& policy,
                                     const std::vector<ProbeState>& probes, int horizon,
                                     const std::string& only = {});

/// The option whose initiation set contains the probe state, or -1 when
/// none or several do.
int owning_option(const Environment& env, const ProbeState& probe);

}  // namespace sap
