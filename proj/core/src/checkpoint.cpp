#include "sap/checkpoint.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace sap {
namespace {

using nlohmann::ordered_json;

ordered_json matrix_json(const Eigen::MatrixXd& m) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from(const ordered_json& j, const char* what) {
  if (!j.is_array()) throw std::runtime_error(std::string("checkpoint field '") + what + "' must be a matrix");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows ? static_cast<Eigen::Index>(j[0].size()) : 0;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw std::runtime_error(std::string("checkpoint field '") + what + "' has ragged rows");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

}  // namespace

Checkpoint make_checkpoint(const TrainState& state, const Rng& rng, const std::string& config_hash,
                           const std::string& env) {
  Checkpoint c;
  c.config_hash = config_hash;
  c.env = env;
  c.alpha = state.policy.inter().alpha;
  c.omega = state.policy.ad().omega;
  c.variance = state.policy.ad().variance;
  c.critic_weights = state.critic.value_weights;
  c.critic_step = state.critic.critic_step;
  std::ostringstream rs;
  rs << rng;
  c.rng_state = rs.str();
  c.k = state.k;
  c.episodes_done = state.episodes_done;
  return c;
}

std::string serialize_checkpoint(const Checkpoint& c) {
  ordered_json j;
  j["format"] = "sap-checkpoint";
  j["version"] = c.version;
  j["config_hash"] = c.config_hash;
  j["env"] = c.env;
  j["alpha"] = matrix_json(c.alpha);
  j["omega"] = matrix_json(c.omega);
  j["variance"] = c.variance;
  ordered_json critic = ordered_json::array();
  for (Eigen::Index i = 0; i < c.critic_weights.size(); ++i) critic.push_back(c.critic_weights[i]);
  j["critic"] = {{"weights", critic}, {"step", c.critic_step}};
  j["rng_state"] = c.rng_state;
  j["k"] = c.k;
  j["episodes_done"] = c.episodes_done;
  return j.dump(1) + "\n";
}

Checkpoint parse_checkpoint(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const ordered_json::parse_error& e) {
    throw std::runtime_error(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || j.value("format", "") != "sap-checkpoint")
    throw std::runtime_error("not a sap checkpoint");
  if (!j.contains("version") || !j["version"].is_number_integer())
    throw std::runtime_error("checkpoint has no version");
  const int version = j["version"].get<int>();
  if (version != kCheckpointVersion)
    throw VersionError("checkpoint version " + std::to_string(version) + " is not supported (expected " +
                       std::to_string(kCheckpointVersion) + ")");
  try {
    Checkpoint c;
    c.version = version;
    c.config_hash = j.at("config_hash").get<std::string>();
    c.env = j.at("env").get<std::string>();
    c.alpha = matrix_from(j.at("alpha"), "alpha");
    c.omega = matrix_from(j.at("omega"), "omega");
    c.variance = j.at("variance").get<double>();
    const auto& w = j.at("critic").at("weights");
    c.critic_weights.resize(static_cast<Eigen::Index>(w.size()));
    for (std::size_t i = 0; i < w.size(); ++i) c.critic_weights[static_cast<Eigen::Index>(i)] = w[i].get<double>();
    c.critic_step = j.at("critic").at("step").get<double>();
    c.rng_state = j.at("rng_state").get<std::string>();
    c.k = j.at("k").get<std::uint64_t>();
    c.episodes_done = j.at("episodes_done").get<std::uint64_t>();
    return c;
  } catch (const ordered_json::exception& e) {
    throw std::runtime_error(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::string& path, const Checkpoint& c) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path);
  out << serialize_checkpoint(c);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read checkpoint " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_checkpoint(ss.str());
}

void apply_checkpoint(const Checkpoint& c, TrainState& state, Rng* rng) {
  auto& alpha = state.policy.inter().alpha;
  auto& omega = state.policy.ad().omega;
  if (c.alpha.rows() != alpha.rows() || c.alpha.cols() != alpha.cols() ||
      c.omega.rows() != omega.rows() || c.omega.cols() != omega.cols())
    throw std::invalid_argument("checkpoint parameter shapes do not match the configured policy");
  if (c.critic_weights.size() != 0 && c.critic_weights.size() != state.critic.value_weights.size())
    throw std::invalid_argument("checkpoint critic does not match the configured feature map");
  alpha = c.alpha;
  omega = c.omega;
  state.policy.ad().variance = c.variance;
  if (c.critic_weights.size() != 0) state.critic.value_weights = c.critic_weights;
  state.critic.critic_step = c.critic_step;
  state.k = c.k;
  state.episodes_done = c.episodes_done;
  if (rng) {
    std::istringstream rs(c.rng_state);
    rs >> *rng;
    if (!rs) throw std::invalid_argument("checkpoint rng state is malformed");
  }
}

}  // namespace sap
