#pragma once

// Bottomless Pit of Death: two rooms split by a wall, a pit above the wall,
// and an easterly wind. Options are fixed distributions over N/S/E/W, each
// operating inside its own partition, with an AP added to the East move.

#include <array>
#include <string>
#include <vector>

#include "sap/pg_smdp.hpp"

namespace sap {

struct Rect {
  double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;

  bool contains(double x, double y) const { return x >= x0 && x <= x1 && y >= y0 && y <= y1; }
  bool valid() const { return x1 > x0 && y1 > y0; }
};

enum class Primitive { north = 0, south = 1, east = 2, west = 3 };

struct BpodOption {
  std::string name;
  /// Probabilities of N, S, E, W.
  std::array<double, 4> action_distribution{0.25, 0.25, 0.25, 0.25};
  /// Where the option may start; partitions are expected to tile the arena.
  Rect partition;
  ApBounds east_ap_bounds{-0.05, 0.05};
};

struct BpodConfig {
  Rect bounds{0.0, 0.0, 1.0, 1.0};
  /// Vertical wall segment x = wall_x, y in [wall_y0, wall_y1].
  double wall_x = 0.5;
  double wall_y0 = 0.0;
  double wall_y1 = 0.3;
  Rect pit{0.46, 0.3, 0.6, 0.42};
  Rect goal{0.7, 0.25, 1.0, 0.45};
  /// Training starts.
  Rect start_region{0.05, 0.05, 0.44, 0.1};
  /// Trap location used for evaluation.
  Rect eval_start_region{0.38, 0.05, 0.44, 0.1};
  double wind_mean = 0.005;
  double wind_std = 0.003;
  double step_size = 0.03;
  /// Boundary between the two default option partitions.
  double split_x = 0.62;
  double step_cost = -1.0;
  double wall_cost = -1.0;
  double pit_cost = -10.0;
  double goal_reward = 100.0;
  std::vector<BpodOption> options;

  /// The hand-specified two-option set: "up-right" west of split_x and
  /// "down-right" from split_x eastwards.
  static std::vector<BpodOption> default_options(double split_x);
  /// Throws std::invalid_argument when the geometry is inconsistent.
  void validate() const;
};

class BpodEnv final : public Environment {
 public:
  explicit BpodEnv(BpodConfig cfg);

  std::string name() const override { return "bpod"; }
  const std::vector<SituationallyAwareOption>& options() const override { return options_; }
  std::vector<std::string> variables() const override { return {"x", "y"}; }
  void observe(const EnvState& s, std::span<double> out) const override;
  /// Uniform in start_region, or eval_start_region after use_eval_starts().
  EnvState reset(Rng& rng) const override;
  StepResult step(const EnvState& s, int option, double ap, Rng& rng) const override;

  /// Deterministic part of a step: applies one primitive with the given wind
  /// displacement. Exposed for tests.
  StepResult apply(const EnvState& s, Primitive action, double ap, double wind) const;

  const BpodConfig& config() const { return cfg_; }
  void use_eval_starts(bool on) { eval_starts_ = on; }

 private:
  BpodConfig cfg_;
  bool eval_starts_ = false;
  std::vector<SituationallyAwareOption> options_;
};

}  // namespace sap
