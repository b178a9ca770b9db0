#pragma once

#include <vector>

#include "sap/pg_smdp.hpp"

namespace sap {

/// One-step contextual option bandit. The clamped AP is binned evenly over
/// its bounds and the reward is read from a [context][option][bin] table, so
/// the whole outcome space is finite and enumerable.
struct BanditConfig {
  std::vector<double> context_x{0.0};
  std::vector<double> context_prob{1.0};
  int num_options = 2;
  ApBounds ap_bounds{-1.0, 1.0};
  double ap_offset = 0.0;
  int bins = 5;
  /// rewards[context][option][bin]
  std::vector<std::vector<std::vector<double>>> rewards;

  void validate() const;
};

class BanditEnv final : public Environment {
 public:
  explicit BanditEnv(BanditConfig cfg);

  std::string name() const override { return "bandit"; }
  const std::vector<SituationallyAwareOption>& options() const override { return options_; }
  std::vector<std::string> variables() const override { return {"x"}; }
  void observe(const EnvState& s, std::span<double> out) const override;
  EnvState reset(Rng& rng) const override;
  StepResult step(const EnvState& s, int option, double ap, Rng& rng) const override;

  const BanditConfig& config() const { return cfg_; }
  int bin_of(double clamped_ap) const;
  EnvState context_state(int context) const;

 private:
  BanditConfig cfg_;
  std::vector<SituationallyAwareOption> options_;
};

}  // namespace sap
