#pragma once

#include <string>

#include "sap/config.hpp"
#include "sap/envs/bandit.hpp"
#include "sap/experiment.hpp"

namespace sap::test {

inline std::string preset(const std::string& name) {
  return std::string(SAP_PRESET_DIR) + "/" + name + ".toml";
}

/// Two contexts, two arms, five AP bins. Shared with the Python oracle that
/// produced the frozen values in the tests.
inline BanditConfig oracle_bandit() {
  BanditConfig b;
  b.context_x = {0.0, 1.0};
  b.context_prob = {0.4, 0.6};
  b.num_options = 2;
  b.ap_bounds = {-1.0, 1.0};
  b.bins = 5;
  b.rewards = {{{0, 1, 2, 1, 0}, {1, 1, 0, 0, 3}}, {{2, 0, 0, 1, 1}, {0, 2, 2, 1, 0}}};
  return b;
}

inline ExperimentConfig oracle_bandit_config() {
  ExperimentConfig c;
  c.name = "bandit";
  c.env = "bandit";
  c.zeta = 1.5;
  c.trainer.objective.zeta = 1.5;
  c.trainer.objective.horizon = 1;
  c.variance = 0.25;
  c.inter_features.terms = {"1", "x"};
  c.ad_features.terms = {"1", "x"};
  c.bandit = oracle_bandit();
  return c;
}

/// alpha = [[0.2, -0.5], [-0.1, 0.3]], omega = [[0.1, 0.4], [-0.3, 0.2]].
inline void set_oracle_params(TwoTieredPolicy& p) {
  p.inter().alpha.resize(2, 2);
  p.inter().alpha << 0.2, -0.5, -0.1, 0.3;
  p.ad().omega.resize(2, 2);
  p.ad().omega << 0.1, 0.4, -0.3, 0.2;
}

}  // namespace sap::test
