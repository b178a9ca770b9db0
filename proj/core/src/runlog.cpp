#include "sap/runlog.hpp"

#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sap/rollout.hpp"

namespace sap {
namespace {

using nlohmann::ordered_json;

template <typename T>
T field(const ordered_json& j, const char* key) {
  if (!j.contains(key)) throw SchemaError(std::string("run log record lacks '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const ordered_json::exception&) {
    throw SchemaError(std::string("run log field '") + key + "' has the wrong type");
  }
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

std::string episode_json(const EpisodeRecord& r) {
  ordered_json j;
  j["episode"] = r.episode;
  j["return"] = r.base_return;
  j["pg_return"] = r.pg_return;
  j["length"] = r.length;
  j["success"] = r.success;
  j["event"] = r.event;
  j["option_counts"] = r.option_counts;
  ordered_json probes = ordered_json::array();
  for (const auto& p : r.ad_mean_probes)
    probes.push_back({{"label", p.label}, {"option", p.option}, {"mean", p.mean}});
  j["ad_mean_probes"] = probes;
  j["alpha_norm"] = r.alpha_norm;
  j["omega_norm"] = r.omega_norm;
  j["wall_time"] = r.wall_time ? ordered_json(*r.wall_time) : ordered_json(nullptr);
  return j.dump();
}

EpisodeRecord parse_episode_json(const std::string& line) {
  ordered_json j;
  try {
    j = ordered_json::parse(line);
  } catch (const ordered_json::parse_error& e) {
    throw SchemaError(std::string("run log line is not JSON: ") + e.what());
  }
  if (!j.is_object()) throw SchemaError("run log line is not a JSON object");
  EpisodeRecord r;
  r.episode = field<std::uint64_t>(j, "episode");
  r.base_return = field<double>(j, "return");
  r.pg_return = field<double>(j, "pg_return");
  r.length = field<std::size_t>(j, "length");
  r.success = field<bool>(j, "success");
  r.event = field<std::string>(j, "event");
  r.option_counts = field<std::vector<int>>(j, "option_counts");
  const auto probes = field<ordered_json>(j, "ad_mean_probes");
  if (!probes.is_array()) throw SchemaError("run log field 'ad_mean_probes' must be an array");
  for (const auto& p : probes)
    r.ad_mean_probes.push_back(
        ProbeRow{field<std::string>(p, "label"), field<int>(p, "option"), field<double>(p, "mean")});
  r.alpha_norm = field<double>(j, "alpha_norm");
  r.omega_norm = field<double>(j, "omega_norm");
  const auto wt = field<ordered_json>(j, "wall_time");
  if (wt.is_number())
    r.wall_time = wt.get<double>();
  else if (!wt.is_null())
    throw SchemaError("run log field 'wall_time' must be a number or null");
  return r;
}

RunLogWriter::RunLogWriter(const std::string& path) : out_(path, std::ios::binary) {
  if (!out_) throw std::runtime_error("cannot write run log " + path);
}

void RunLogWriter::write(const EpisodeRecord& r) { out_ << episode_json(r) << '\n'; }

void write_run_log(const std::string& path, const std::vector<EpisodeRecord>& records) {
  RunLogWriter w(path);
  for (const auto& r : records) w.write(r);
}

std::vector<EpisodeRecord> read_run_log(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read run log " + path);
  std::vector<EpisodeRecord> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      out.push_back(parse_episode_json(line));
    } catch (const SchemaError& e) {
      throw SchemaError(path + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

std::string plot_data_csv(const std::vector<std::vector<EpisodeRecord>>& trials) {
  std::ostringstream os;
  os << "trial,episode,metric,value\n";
  for (std::size_t t = 0; t < trials.size(); ++t) {
    double cum_return = 0.0;
    double cum_success = 0.0;
    double cum_goals = 0.0;
    for (const auto& r : trials[t]) {
      cum_return += r.base_return;
      cum_success += r.success;
      const bool goal = r.event == "goal";
      cum_goals += goal;
      const std::string prefix = std::to_string(t) + "," + std::to_string(r.episode) + ",";
      os << prefix << "return," << num(r.base_return) << '\n';
      os << prefix << "cumulative_return," << num(cum_return) << '\n';
      os << prefix << "success," << (r.success ? 1 : 0) << '\n';
      os << prefix << "cumulative_successes," << num(cum_success) << '\n';
      os << prefix << "goal," << (goal ? 1 : 0) << '\n';
      os << prefix << "cumulative_goals," << num(cum_goals) << '\n';
      os << prefix << "length," << r.length << '\n';
      for (const auto& p : r.ad_mean_probes)
        os << prefix << "probe:" << p.label << ':' << p.option << ',' << num(p.mean) << '\n';
    }
  }
  return os.str();
}

std::string trajectory_csv(const std::vector<AwarenessTrajectory>& episodes, const Environment& env) {
  const auto variables = env.variables();
  std::ostringstream os;
  os << "episode,t,option,ap,base_reward,eta,terminal";
  for (const auto& v : variables) os << ',' << v;
  os << '\n';
  std::vector<double> obs(variables.size());
  for (std::size_t e = 0; e < episodes.size(); ++e) {
    for (const auto& s : episodes[e].steps) {
      env.observe(s.z.base, obs);
      os << e << ',' << s.z.t << ',' << s.option_id << ',' << num(s.ap) << ',' << num(s.base_reward) << ','
         << num(s.z.eta) << ',' << (s.terminal ? 1 : 0);
      for (double v : obs) os << ',' << num(v);
      os << '\n';
    }
  }
  return os.str();
}

}  // namespace sap
