#pragma once

// JSONL run logs (one episode per line) and the CSV exports built on them.

#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sap/pg_smdp.hpp"
#include "sap/trainer.hpp"

namespace sap {

class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One JSON object without the trailing newline. Fields: episode, return,
/// pg_return, length, success, event, option_counts, ad_mean_probes,
/// alpha_norm, omega_norm, wall_time.
std::string episode_json(const EpisodeRecord& r);
/// Throws SchemaError when a field is missing or has the wrong type.
EpisodeRecord parse_episode_json(const std::string& line);

class RunLogWriter {
 public:
  explicit RunLogWriter(const std::string& path);
  void write(const EpisodeRecord& r);
  void flush() { out_.flush(); }

 private:
  std::ofstream out_;
};

void write_run_log(const std::string& path, const std::vector<EpisodeRecord>& records);
/// Throws SchemaError with the offending line number.
std::vector<EpisodeRecord> read_run_log(const std::string& path);

/// Long-format CSV "trial,episode,metric,value" with per-episode return,
/// cumulative_return, success, cumulative_successes, goal,
/// cumulative_goals, length and one probe:<label>:<option> series per probe
/// row. Trials are numbered by position.
std::string plot_data_csv(const std::vector<std::vector<EpisodeRecord>>& trials);

/// One row per transition: episode, t, option, ap, base_reward, eta,
/// terminal, then the environment variables.
std::string trajectory_csv(const std::vector<AwarenessTrajectory>& episodes, const Environment& env);

}  // namespace sap
