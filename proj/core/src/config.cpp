#include "sap/config.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>
#include <toml.hpp>

namespace sap {
namespace {

using nlohmann::json;

std::string located(const std::string& source, int line, const std::string& msg) {
  if (line > 0) return source + ":" + std::to_string(line) + ": " + msg;
  return source + ": " + msg;
}

int line_of(const toml::node& n) { return static_cast<int>(n.source().begin.line); }

/// Typed access to one TOML table that remembers which keys were read, so
/// leftovers can be reported as unknown.
class Section {
 public:
  Section(const toml::table& t, std::string path, const std::string& source)
      : t_(t), path_(std::move(path)), source_(source) {}

  [[noreturn]] void fail(const toml::node& n, const std::string& msg) const {
    throw ConfigError(source_, line_of(n), msg);
  }
  [[noreturn]] void fail_here(const std::string& msg) const {
    throw ConfigError(source_, line_of(t_), msg);
  }

  std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const toml::node* find(const std::string& key) {
    used_.insert(key);
    return t_.get(key);
  }

  bool has(const std::string& key) const { return t_.contains(key); }

  void real(const std::string& key, double& out) {
    if (const auto* n = find(key)) out = as_real(*n, key);
  }
  void real(const std::string& key, std::optional<double>& out) {
    if (const auto* n = find(key)) out = as_real(*n, key);
  }
  template <typename Int>
  void integer(const std::string& key, Int& out, std::int64_t min) {
    if (const auto* n = find(key)) {
      const auto v = n->value<std::int64_t>();
      if (!n->is_integer() || !v) fail(*n, key_path(key) + " must be an integer");
      if (*v < min) fail(*n, key_path(key) + " must be >= " + std::to_string(min));
      out = static_cast<Int>(*v);
    }
  }
  void boolean(const std::string& key, bool& out) {
    if (const auto* n = find(key)) {
      if (!n->is_boolean()) fail(*n, key_path(key) + " must be true or false");
      out = *n->value<bool>();
    }
  }
  void string(const std::string& key, std::string& out) {
    if (const auto* n = find(key)) {
      if (!n->is_string()) fail(*n, key_path(key) + " must be a string");
      out = *n->value<std::string>();
    }
  }
  void reals(const std::string& key, std::vector<double>& out, std::size_t exact = 0) {
    if (const auto* n = find(key)) out = as_reals(*n, key, exact);
  }
  void strings(const std::string& key, std::vector<std::string>& out) {
    if (const auto* n = find(key)) {
      const auto* arr = n->as_array();
      if (!arr) fail(*n, key_path(key) + " must be an array of strings");
      out.clear();
      for (const auto& e : *arr) {
        if (!e.is_string()) fail(e, key_path(key) + " must contain only strings");
        out.push_back(*e.value<std::string>());
      }
    }
  }
  void rect(const std::string& key, Rect& out) {
    if (const auto* n = find(key)) {
      const auto v = as_reals(*n, key, 4);
      out = Rect{v[0], v[1], v[2], v[3]};
      if (!out.valid()) fail(*n, key_path(key) + " must be [x0, y0, x1, y1] with x1 > x0 and y1 > y0");
    }
  }
  void bounds(const std::string& key, ApBounds& out) {
    if (const auto* n = find(key)) {
      const auto v = as_reals(*n, key, 2);
      out = ApBounds{v[0], v[1]};
      if (!(out.hi > out.lo)) fail(*n, key_path(key) + " must be [lo, hi] with hi > lo");
    }
  }

  std::optional<Section> sub(const std::string& key) {
    const auto* n = find(key);
    if (!n) return std::nullopt;
    const auto* t = n->as_table();
    if (!t) fail(*n, key_path(key) + " must be a table");
    return Section(*t, key_path(key), source_);
  }

  /// Array of tables ([[key]]).
  std::vector<Section> list(const std::string& key) {
    std::vector<Section> out;
    const auto* n = find(key);
    if (!n) return out;
    const auto* arr = n->as_array();
    if (!arr) fail(*n, key_path(key) + " must be an array of tables");
    for (const auto& e : *arr) {
      const auto* t = e.as_table();
      if (!t) fail(e, key_path(key) + " entries must be tables");
      out.emplace_back(*t, key_path(key), source_);
    }
    return out;
  }

  const toml::node* raw(const std::string& key) { return find(key); }

  /// Rejects keys that were never read.
  void finish() const {
    for (auto&& [k, v] : t_) {
      const std::string name(k.str());
      if (!used_.count(name)) fail(v, "unknown key '" + key_path(name) + "'");
    }
  }

  double as_real(const toml::node& n, const std::string& key) const {
    if (!n.is_number()) fail(n, key_path(key) + " must be a number");
    const double v = *n.value<double>();
    if (!std::isfinite(v)) fail(n, key_path(key) + " must be finite");
    return v;
  }

  std::vector<double> as_reals(const toml::node& n, const std::string& key, std::size_t exact) const {
    const auto* arr = n.as_array();
    if (!arr) fail(n, key_path(key) + " must be an array of numbers");
    if (exact && arr->size() != exact)
      fail(n, key_path(key) + " must have exactly " + std::to_string(exact) + " entries");
    std::vector<double> out;
    for (const auto& e : *arr) out.push_back(as_real(e, key));
    return out;
  }

 private:
  const toml::table& t_;
  std::string path_;
  const std::string& source_;
  std::set<std::string> used_;
};

void read_features(Section s, FeatureSpec& f) {
  s.string("kind", f.kind);
  if (f.kind != "linear" && f.kind != "fourier")
    s.fail_here(s.key_path("kind") + " must be \"linear\" or \"fourier\"");
  s.integer("order", f.order, 0);
  s.strings("inputs", f.inputs);
  s.strings("terms", f.terms);
  s.finish();
}

void read_bpod(Section s, BpodConfig& b) {
  s.rect("bounds", b.bounds);
  s.real("wall_x", b.wall_x);
  s.real("wall_y0", b.wall_y0);
  s.real("wall_y1", b.wall_y1);
  s.rect("pit", b.pit);
  s.rect("goal", b.goal);
  s.rect("start_region", b.start_region);
  s.rect("eval_start_region", b.eval_start_region);
  s.real("wind_mean", b.wind_mean);
  s.real("wind_std", b.wind_std);
  s.real("step_size", b.step_size);
  s.real("step_cost", b.step_cost);
  s.real("wall_cost", b.wall_cost);
  s.real("pit_cost", b.pit_cost);
  s.real("goal_reward", b.goal_reward);
  s.real("split_x", b.split_x);
  b.options = BpodConfig::default_options(b.split_x);
  auto opts = s.list("options");
  if (!opts.empty()) b.options.clear();
  for (auto& o : opts) {
    BpodOption opt;
    o.string("name", opt.name);
    std::vector<double> p;
    o.reals("probs", p, 4);
    if (!p.empty()) std::copy(p.begin(), p.end(), opt.action_distribution.begin());
    o.rect("partition", opt.partition);
    o.bounds("ap_bounds", opt.east_ap_bounds);
    if (opt.name.empty()) o.fail_here("each bpod option needs a name");
    if (!opt.partition.valid()) o.fail_here("bpod option '" + opt.name + "' needs a partition");
    o.finish();
    b.options.push_back(opt);
  }
  s.finish();
}

void read_striker(Section s, StrikerConfig& c) {
  if (const auto* n = s.raw("scenario")) {
    if (!n->is_string()) s.fail(*n, "env.striker.scenario must be a string");
    try {
      c.scenario = scenario_from_string(*n->value<std::string>());
    } catch (const std::invalid_argument& e) {
      s.fail(*n, e.what());
    }
  }
  s.rect("field", c.field);
  s.real("goal_y0", c.goal_y0);
  s.real("goal_y1", c.goal_y1);
  s.rect("box", c.box);
  s.rect("start_region", c.start_region);
  s.real("agent_speed", c.agent_speed);
  s.real("control_radius", c.control_radius);
  s.real("kick_per_power", c.kick_per_power);
  s.bounds("power_bounds", c.power_bounds);
  s.real("power_offset", c.power_offset);
  s.real("keeper_x", c.keeper_x);
  s.real("keeper_speed", c.keeper_speed);
  s.real("capture_radius", c.capture_radius);
  s.real("keeper_reach", c.keeper_reach);
  s.real("dribble_capture", c.dribble_capture);
  s.real("loose_capture", c.loose_capture);
  s.real("shot_max", c.shot_max);
  s.real("shot_scale", c.shot_scale);
  s.real("shot_range", c.shot_range);
  s.real("r_move", c.r_move);
  s.real("r_dribble_far", c.r_dribble_far);
  s.real("r_dribble_near", c.r_dribble_near);
  s.real("r_shoot_near", c.r_shoot_near);
  s.real("r_shoot_far", c.r_shoot_far);
  s.real("r_score", c.r_score);
  s.real("goal_reward", c.goal_reward);
  s.finish();
}

void read_bandit(Section s, BanditConfig& b) {
  s.reals("context_x", b.context_x);
  s.reals("context_prob", b.context_prob);
  s.integer("num_options", b.num_options, 1);
  s.bounds("ap_bounds", b.ap_bounds);
  s.real("ap_offset", b.ap_offset);
  s.integer("bins", b.bins, 1);
  if (const auto* n = s.raw("rewards")) {
    b.rewards.clear();
    const auto* ctxs = n->as_array();
    if (!ctxs) s.fail(*n, "env.bandit.rewards must be a [context][option][bin] array");
    for (const auto& ctx : *ctxs) {
      const auto* opts = ctx.as_array();
      if (!opts) s.fail(ctx, "env.bandit.rewards must be a [context][option][bin] array");
      auto& rows = b.rewards.emplace_back();
      for (const auto& o : *opts) rows.push_back(s.as_reals(o, "rewards", 0));
    }
  }
  s.finish();
}

std::size_t env_coord_count(const ExperimentConfig& c) {
  if (c.env == "bpod") return 2;
  if (c.env == "striker") return 5;
  return 2;
}

std::vector<std::string> env_variables(const ExperimentConfig& c) {
  if (c.env == "bpod") return {"x", "y"};
  if (c.env == "striker") return {"x", "y", "ball_x", "ball_y", "dist_goal", "possession", "keeper_y"};
  return {"x"};
}

json rect_json(const Rect& r) { return json::array({r.x0, r.y0, r.x1, r.y1}); }
json bounds_json(const ApBounds& b) { return json::array({b.lo, b.hi}); }

json features_json(const FeatureSpec& f) {
  json j{{"kind", f.kind}};
  if (f.kind == "fourier") {
    j["order"] = f.order;
    j["inputs"] = f.inputs;
  } else {
    j["terms"] = f.terms;
  }
  return j;
}

}  // namespace

ConfigError::ConfigError(const std::string& source, int line, const std::string& msg)
    : std::runtime_error(located(source, line, msg)), line_(line) {}

double ExperimentConfig::resolved_variance() const {
  if (variance) return *variance;
  double range = 1.0;
  if (env == "bpod") {
    range = 0.0;
    for (const auto& o : bpod.options) range = std::max(range, o.east_ap_bounds.width());
  } else if (env == "striker") {
    range = striker.power_bounds.width();
  } else if (env == "bandit") {
    range = bandit.ap_bounds.width();
  }
  const double sd = 0.2 * range;
  return sd * sd;
}

void ExperimentConfig::validate(const std::string& source) const {
  auto fail = [&source](const std::string& msg) { throw ConfigError(source, 0, msg); };
  if (env != "bpod" && env != "striker" && env != "bandit")
    fail("experiment.env must be one of bpod, striker, bandit");
  if (trainer.kind == ObjectiveKind::pg_smdp && !zeta)
    fail("a pg-smdp objective requires pg_smdp.zeta");
  try {
    trainer.objective.validate();
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
  if (auto v = validate_schedule(schedule)) fail("schedule rejected: " + *v);
  if (episodes < 1 || trials < 1) fail("episodes and trials must be >= 1");
  if (trainer.batch_size < 1) fail("trainer.batch_size must be >= 1");
  if (trainer.workers < 1) fail("trainer.workers must be >= 1");
  if (!(trainer.alpha_radius > 0.0) || !(trainer.omega_radius > 0.0))
    fail("projection radii must be positive");
  if (!(trainer.critic_scale > 0.0)) fail("trainer.critic_scale must be positive");
  if (!(resolved_variance() > 0.0)) fail("policy.variance must be positive");
  try {
    if (env == "bpod") bpod.validate();
    if (env == "striker") striker.validate();
    if (env == "bandit") bandit.validate();
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
  const auto channels = observation_channels(env_variables(*this));
  try {
    make_feature_map(inter_features, channels, scaling);
    make_feature_map(ad_features, channels, scaling);
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
  std::set<std::string> labels;
  for (const auto& p : probes) {
    if (p.label.empty()) fail("probes need a label");
    if (!labels.insert(p.label).second) fail("duplicate probe label '" + p.label + "'");
    if (p.coords.size() != env_coord_count(*this))
      fail("probe '" + p.label + "' needs " + std::to_string(env_coord_count(*this)) + " coordinates");
    if (p.t < 0 || p.t >= trainer.objective.horizon) fail("probe '" + p.label + "' has t outside [0, horizon)");
  }
}

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  toml::table root;
  try {
    root = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    throw ConfigError(source, static_cast<int>(e.source().begin.line), std::string(e.description()));
  }

  ExperimentConfig c;
  Section top(root, "", source);

  if (auto s = top.sub("experiment")) {
    s->string("name", c.name);
    s->string("env", c.env);
    if (c.env != "bpod" && c.env != "striker" && c.env != "bandit")
      s->fail(*root["experiment"]["env"].node(), "experiment.env must be one of bpod, striker, bandit");
    if (const auto* n = s->raw("objective")) {
      if (!n->is_string()) s->fail(*n, "experiment.objective must be a string");
      try {
        c.trainer.kind = objective_kind_from_string(*n->value<std::string>());
      } catch (const std::invalid_argument& e) {
        s->fail(*n, e.what());
      }
    }
    s->integer("episodes", c.episodes, 1);
    s->integer("eval_episodes", c.eval_episodes, 1);
    s->integer("trials", c.trials, 1);
    s->finish();
  }

  c.trainer.objective.horizon = c.env == "striker" ? 150 : (c.env == "bandit" ? 1 : 100);
  if (auto s = top.sub("pg_smdp")) {
    s->real("zeta", c.zeta);
    s->integer("horizon", c.trainer.objective.horizon, 1);
    s->real("gamma", c.trainer.objective.gamma);
    s->finish();
  }
  c.trainer.objective.zeta = c.zeta ? *c.zeta : std::numeric_limits<double>::max();

  if (auto s = top.sub("trainer")) {
    if (const auto* n = s->raw("mode")) {
      if (!n->is_string()) s->fail(*n, "trainer.mode must be a string");
      try {
        c.trainer.mode = gradient_mode_from_string(*n->value<std::string>());
      } catch (const std::invalid_argument& e) {
        s->fail(*n, e.what());
      }
    }
    s->integer("batch_size", c.trainer.batch_size, 1);
    s->boolean("baseline", c.trainer.baseline);
    s->real("alpha_radius", c.trainer.alpha_radius);
    s->real("omega_radius", c.trainer.omega_radius);
    s->real("critic_scale", c.trainer.critic_scale);
    s->integer("workers", c.trainer.workers, 1);
    s->boolean("learn_alpha", c.trainer.learn_alpha);
    s->boolean("learn_omega", c.trainer.learn_omega);
    s->finish();
  }

  if (auto s = top.sub("schedule")) {
    if (const auto* n = s->raw("kind")) {
      if (!n->is_string()) s->fail(*n, "schedule.kind must be a string");
      try {
        c.schedule.kind = schedule_kind_from_string(*n->value<std::string>());
      } catch (const std::invalid_argument& e) {
        s->fail(*n, e.what());
      }
    }
    s->real("a0", c.schedule.a0);
    s->real("b0", c.schedule.b0);
    s->real("power_a", c.schedule.power_a);
    s->real("power_b", c.schedule.power_b);
    s->real("offset", c.schedule.offset);
    if (auto v = validate_schedule(c.schedule)) s->fail_here("schedule rejected: " + *v);
    s->finish();
  }

  if (auto s = top.sub("policy")) {
    s->real("variance", c.variance);
    if (c.variance && !(*c.variance > 0.0)) s->fail(*s->raw("variance"), "policy.variance must be positive");
    s->boolean("awareness", c.awareness);
    if (auto f = s->sub("inter_features")) read_features(*f, c.inter_features);
    if (auto f = s->sub("ad_features")) read_features(*f, c.ad_features);
    s->finish();
  }

  if (auto s = top.sub("scaling")) {
    for (auto&& [k, v] : *root["scaling"].as_table()) {
      const std::string name(k.str());
      std::vector<double> lohi;
      s->reals(name, lohi, 2);
      if (!(lohi[1] > lohi[0])) s->fail(v, "scaling." + name + " must be [lo, hi] with hi > lo");
      c.scaling[name] = VariableScaling{lohi[0], lohi[1]};
    }
    s->finish();
  }

  for (auto& p : top.list("probes")) {
    ProbeSpec spec;
    p.string("label", spec.label);
    p.reals("coords", spec.coords);
    p.real("eta", spec.eta);
    p.integer("t", spec.t, 0);
    p.finish();
    c.probes.push_back(spec);
  }

  c.bpod.options = BpodConfig::default_options(c.bpod.split_x);
  if (auto s = top.sub("env")) {
    if (auto b = s->sub("bpod")) read_bpod(*b, c.bpod);
    if (auto st = s->sub("striker")) read_striker(*st, c.striker);
    if (auto b = s->sub("bandit")) read_bandit(*b, c.bandit);
    s->finish();
  }
  top.finish();

  c.validate(source);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path, 0, "cannot open config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

std::string canonical_config_json(const ExperimentConfig& c) {
  json j;
  j["experiment"] = {{"name", c.name},
                     {"env", c.env},
                     {"objective", to_string(c.trainer.kind)},
                     {"episodes", c.episodes},
                     {"eval_episodes", c.eval_episodes},
                     {"trials", c.trials}};
  j["pg_smdp"] = {{"zeta", c.zeta ? json(*c.zeta) : json(nullptr)},
                  {"horizon", c.trainer.objective.horizon},
                  {"gamma", c.trainer.objective.gamma}};
  j["trainer"] = {{"mode", to_string(c.trainer.mode)},
                  {"batch_size", c.trainer.batch_size},
                  {"baseline", c.trainer.baseline},
                  {"alpha_radius", c.trainer.alpha_radius},
                  {"omega_radius", c.trainer.omega_radius},
                  {"critic_scale", c.trainer.critic_scale},
                  {"learn_alpha", c.trainer.learn_alpha},
                  {"learn_omega", c.trainer.learn_omega}};
  j["schedule"] = {{"kind", to_string(c.schedule.kind)},
                   {"a0", c.schedule.a0},
                   {"b0", c.schedule.b0},
                   {"power_a", c.schedule.power_a},
                   {"power_b", c.schedule.power_b},
                   {"offset", c.schedule.offset}};
  j["policy"] = {{"variance", c.resolved_variance()},
                 {"awareness", c.awareness},
                 {"inter_features", features_json(c.inter_features)},
                 {"ad_features", features_json(c.ad_features)}};
  json scaling = json::object();
  for (const auto& [k, v] : c.scaling) scaling[k] = json::array({v.lo, v.hi});
  j["scaling"] = scaling;
  json probes = json::array();
  for (const auto& p : c.probes)
    probes.push_back({{"label", p.label}, {"coords", p.coords}, {"eta", p.eta}, {"t", p.t}});
  j["probes"] = probes;

  // Every environment section is hashed, selected or not.
  {
    const auto& b = c.bpod;
    json opts = json::array();
    for (const auto& o : b.options)
      opts.push_back({{"name", o.name},
                      {"probs", o.action_distribution},
                      {"partition", rect_json(o.partition)},
                      {"ap_bounds", bounds_json(o.east_ap_bounds)}});
    j["env"]["bpod"] = {{"bounds", rect_json(b.bounds)},
                        {"wall_x", b.wall_x},
                        {"wall_y0", b.wall_y0},
                        {"wall_y1", b.wall_y1},
                        {"pit", rect_json(b.pit)},
                        {"goal", rect_json(b.goal)},
                        {"start_region", rect_json(b.start_region)},
                        {"eval_start_region", rect_json(b.eval_start_region)},
                        {"wind_mean", b.wind_mean},
                        {"wind_std", b.wind_std},
                        {"step_size", b.step_size},
                        {"step_cost", b.step_cost},
                        {"wall_cost", b.wall_cost},
                        {"pit_cost", b.pit_cost},
                        {"goal_reward", b.goal_reward},
                        {"split_x", b.split_x},
                        {"options", opts}};
  }
  {
    const auto& s = c.striker;
    j["env"]["striker"] = {{"scenario", to_string(s.scenario)},
                           {"field", rect_json(s.field)},
                           {"goal_y0", s.goal_y0},
                           {"goal_y1", s.goal_y1},
                           {"box", rect_json(s.box)},
                           {"start_region", rect_json(s.start_region)},
                           {"agent_speed", s.agent_speed},
                           {"control_radius", s.control_radius},
                           {"kick_per_power", s.kick_per_power},
                           {"power_bounds", bounds_json(s.power_bounds)},
                           {"power_offset", s.power_offset},
                           {"keeper_x", s.keeper_x},
                           {"keeper_speed", s.keeper_speed},
                           {"capture_radius", s.capture_radius},
                           {"keeper_reach", s.keeper_reach},
                           {"dribble_capture", s.dribble_capture},
                           {"loose_capture", s.loose_capture},
                           {"shot_max", s.shot_max},
                           {"shot_scale", s.shot_scale},
                           {"shot_range", s.shot_range},
                           {"r_move", s.r_move},
                           {"r_dribble_far", s.r_dribble_far},
                           {"r_dribble_near", s.r_dribble_near},
                           {"r_shoot_near", s.r_shoot_near},
                           {"r_shoot_far", s.r_shoot_far},
                           {"r_score", s.r_score},
                           {"goal_reward", s.goal_reward}};
  }
  {
    const auto& b = c.bandit;
    j["env"]["bandit"] = {{"context_x", b.context_x},
                          {"context_prob", b.context_prob},
                          {"num_options", b.num_options},
                          {"ap_bounds", bounds_json(b.ap_bounds)},
                          {"ap_offset", b.ap_offset},
                          {"bins", b.bins},
                          {"rewards", b.rewards}};
  }
  return j.dump();
}

std::string config_hash(const ExperimentConfig& cfg) {
  const std::string text = canonical_config_json(cfg);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

}  // namespace sap
