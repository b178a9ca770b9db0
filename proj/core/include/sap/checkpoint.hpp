#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

#include "sap/pg_smdp.hpp"
#include "sap/trainer.hpp"

namespace sap {

inline constexpr int kCheckpointVersion = 1;

class VersionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Checkpoint {
  int version = kCheckpointVersion;
  std::string config_hash;
  std::string env;
  Eigen::MatrixXd alpha;
  Eigen::MatrixXd omega;
  double variance = 0.0;
  Eigen::VectorXd critic_weights;
  double critic_step = 0.0;
  /// Textual mt19937_64 state.
  std::string rng_state;
  std::uint64_t k = 1;
  std::uint64_t episodes_done = 0;
};

Checkpoint make_checkpoint(const TrainState& state, const Rng& rng, const std::string& config_hash,
                           const std::string& env);

/// JSON text; doubles are written in shortest round-trip form so that
/// serialize(parse(serialize(c))) == serialize(c).
std::string serialize_checkpoint(const Checkpoint& c);
/// Throws VersionError for another format version and std::runtime_error
/// for malformed input.
Checkpoint parse_checkpoint(const std::string& text);

void save_checkpoint(const std::string& path, const Checkpoint& c);
Checkpoint load_checkpoint(const std::string& path);

/// Copies parameters into `state` (and the rng state into `rng` when given).
/// Throws std::invalid_argument when shapes disagree with the policy.
void apply_checkpoint(const Checkpoint& c, TrainState& state, Rng* rng = nullptr);

}  // namespace sap
