#pragma once

// Experiment configuration: one TOML file per experiment, resolved into
// typed structs with defaults filled in.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sap/envs/bandit.hpp"
#include "sap/envs/bpod.hpp"
#include "sap/envs/striker.hpp"
#include "sap/features.hpp"
#include "sap/schedule.hpp"
#include "sap/trainer.hpp"

namespace sap {

/// Invalid configuration. `line` is 0 when no source position is known.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& source, int line, const std::string& msg);
  int line() const { return line_; }

 private:
  int line_;
};

struct ProbeSpec {
  std::string label;
  std::vector<double> coords;
  double eta = 0.0;
  int t = 0;
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::string env = "bpod";  // bpod | striker | bandit
  std::uint64_t episodes = 1000;
  std::uint64_t eval_episodes = 100;
  std::uint64_t trials = 1;
  std::optional<double> zeta;
  TrainerConfig trainer;
  StepSchedule schedule;
  /// False pins every AP to its option's resting value (fixed options).
  bool awareness = true;
  std::optional<double> variance;
  FeatureSpec inter_features;
  FeatureSpec ad_features;
  ScalingTable scaling;
  std::vector<ProbeSpec> probes;
  BpodConfig bpod;
  StrikerConfig striker;
  BanditConfig bandit;

  /// Fixed AD variance actually used: the configured value or a default of
  /// (0.2 * AP range)^2 over the environment's widest AP range.
  double resolved_variance() const;
  /// Throws ConfigError (line 0) on semantic problems: invalid schedule,
  /// inconsistent geometry, pg-smdp without zeta, and so on.
  void validate(const std::string& source = "config") const;
};

/// Parses and validates. Syntax errors and type errors carry the line of the
/// offending entry.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& text, const std::string& source = "<string>");

/// Canonical JSON text of the fully resolved configuration.
std::string canonical_config_json(const ExperimentConfig& cfg);
/// 64-bit FNV-1a of canonical_config_json, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace sap
