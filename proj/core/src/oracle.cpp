#include "sap/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "sap/rollout.hpp"

namespace sap {
namespace {

void check_distribution(const std::vector<double>& p, const char* what) {
  double total = 0.0;
  for (double v : p) {
    if (!(v >= 0.0)) throw std::invalid_argument(std::string(what) + " has a negative entry");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument(std::string(what) + " does not sum to 1");
}

struct PathWalker {
  const TinyMdp& mdp;
  const TinyPolicy& pol;
  double zeta;
  int horizon;
  std::size_t max_leaves;
  std::size_t leaves = 0;
  double success = 0.0;

  void walk(int s, int t, double eta, double prob) {
    for (int o = 0; o < mdp.num_options; ++o) {
      const double po = pol.option_prob[s][o];
      if (po == 0.0) continue;
      for (int a = 0; a < mdp.num_ap; ++a) {
        const double pa = pol.ap_prob[s][o][a];
        if (pa == 0.0) continue;
        for (const auto& out : mdp.transitions[s][o][a]) {
          if (out.prob == 0.0) continue;
          const double p = prob * po * pa * out.prob;
          const double e = eta + out.reward;
          if (out.terminal || t + 1 == horizon) {
            if (++leaves > max_leaves) throw std::invalid_argument("outcome tree too large to enumerate");
            if (e >= zeta) success += p;
          } else {
            walk(out.next, t + 1, e, p);
          }
        }
      }
    }
  }
};

struct AugmentedChain {
  const TinyMdp& mdp;
  const TinyPolicy& pol;
  PgSmdpConfig cfg;
  std::map<std::tuple<int, int, double>, double> memo;

  // Expected sum of indicator rewards from augmented state (s, eta) at t.
  double value(int s, int t, double eta) {
    const auto key = std::make_tuple(t, s, eta);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    double v = 0.0;
    for (int o = 0; o < mdp.num_options; ++o) {
      const double po = pol.option_prob[s][o];
      if (po == 0.0) continue;
      for (int a = 0; a < mdp.num_ap; ++a) {
        const double pa = pol.ap_prob[s][o][a];
        if (pa == 0.0) continue;
        for (const auto& out : mdp.transitions[s][o][a]) {
          if (out.prob == 0.0) continue;
          const AugmentedState z{EnvState{{static_cast<double>(s)}, {}}, eta, t};
          const AugmentedState zn =
              augment_transition(z, out.reward, EnvState{{static_cast<double>(out.next)}, {}}, cfg.horizon);
          double r;
          if (out.terminal)
            r = terminal_pg_reward(zn, cfg);
          else if (zn.t == cfg.horizon)
            r = pg_reward(zn, cfg);
          else
            r = value(out.next, zn.t, zn.eta);
          v += po * pa * out.prob * r;
        }
      }
    }
    memo.emplace(key, v);
    return v;
  }
};

double std_normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }
double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

}  // namespace

void TinyMdp::validate() const {
  if (num_states < 1 || num_options < 1 || num_ap < 1)
    throw std::invalid_argument("tiny MDP needs at least one state, option and AP value");
  if (start.size() != static_cast<std::size_t>(num_states))
    throw std::invalid_argument("tiny MDP start distribution has the wrong size");
  check_distribution(start, "start distribution");
  if (transitions.size() != static_cast<std::size_t>(num_states))
    throw std::invalid_argument("tiny MDP transition table has the wrong state count");
  for (const auto& per_o : transitions) {
    if (per_o.size() != static_cast<std::size_t>(num_options))
      throw std::invalid_argument("tiny MDP transition table has the wrong option count");
    for (const auto& per_a : per_o) {
      if (per_a.size() != static_cast<std::size_t>(num_ap))
        throw std::invalid_argument("tiny MDP transition table has the wrong AP count");
      for (const auto& outs : per_a) {
        std::vector<double> p;
        for (const auto& out : outs) {
          if (out.next < 0 || out.next >= num_states)
            throw std::invalid_argument("tiny MDP outcome points outside the state set");
          if (!std::isfinite(out.reward)) throw std::invalid_argument("tiny MDP reward is not finite");
          p.push_back(out.prob);
        }
        check_distribution(p, "outcome distribution");
      }
    }
  }
}

void TinyPolicy::validate(const TinyMdp& mdp) const {
  if (option_prob.size() != static_cast<std::size_t>(mdp.num_states) ||
      ap_prob.size() != static_cast<std::size_t>(mdp.num_states))
    throw std::invalid_argument("tiny policy state count mismatch");
  for (int s = 0; s < mdp.num_states; ++s) {
    if (option_prob[s].size() != static_cast<std::size_t>(mdp.num_options) ||
        ap_prob[s].size() != static_cast<std::size_t>(mdp.num_options))
      throw std::invalid_argument("tiny policy option count mismatch");
    check_distribution(option_prob[s], "option distribution");
    for (const auto& pa : ap_prob[s]) {
      if (pa.size() != static_cast<std::size_t>(mdp.num_ap))
        throw std::invalid_argument("tiny policy AP count mismatch");
      check_distribution(pa, "AP distribution");
    }
  }
}

PgValues enumerate_pg_values(const TinyMdp& mdp, const TinyPolicy& policy, double zeta,
                             int horizon, std::size_t max_leaves) {
  mdp.validate();
  policy.validate(mdp);
  if (horizon < 1 || horizon > 8) throw std::invalid_argument("enumeration horizon must lie in [1, 8]");
  const PgSmdpConfig cfg{zeta, horizon, 1.0};
  cfg.validate();

  PgValues out;
  PathWalker walker{mdp, policy, zeta, horizon, max_leaves};
  AugmentedChain chain{mdp, policy, cfg, {}};
  for (int s = 0; s < mdp.num_states; ++s) {
    if (mdp.start[s] == 0.0) continue;
    walker.walk(s, 0, 0.0, mdp.start[s]);
    out.augmented_return += mdp.start[s] * chain.value(s, 0, 0.0);
  }
  out.success_probability = walker.success;
  out.leaves = walker.leaves;
  return out;
}

TinyMdp random_tiny_mdp(int states, int options, int ap, Rng& rng) {
  std::uniform_int_distribution<int> reward(-1, 2);
  std::uniform_int_distribution<int> next(0, states - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  TinyMdp m;
  m.num_states = states;
  m.num_options = options;
  m.num_ap = ap;
  m.start.assign(static_cast<std::size_t>(states), 0.0);
  double total = 0.0;
  for (auto& p : m.start) total += (p = unit(rng) + 0.1);
  for (auto& p : m.start) p /= total;
  m.transitions.resize(static_cast<std::size_t>(states));
  for (auto& per_o : m.transitions) {
    per_o.resize(static_cast<std::size_t>(options));
    for (auto& per_a : per_o) {
      per_a.resize(static_cast<std::size_t>(ap));
      for (auto& outs : per_a) {
        const int n = unit(rng) < 0.5 ? 1 : 2;
        const double split = n == 1 ? 1.0 : 0.2 + 0.6 * unit(rng);
        for (int i = 0; i < n; ++i) {
          TinyOutcome o;
          o.next = next(rng);
          o.reward = reward(rng);
          o.prob = i == 0 ? split : 1.0 - split;
          o.terminal = unit(rng) < 0.15;
          outs.push_back(o);
        }
      }
    }
  }
  return m;
}

Eigen::VectorXd finite_diff_grad(const std::function<double(const Eigen::VectorXd&)>& f,
                                 const Eigen::VectorXd& x, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("finite difference epsilon must be positive");
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + eps;
    const double up = f(probe);
    probe[i] = x[i] - eps;
    const double down = f(probe);
    probe[i] = x[i];
    g[i] = (up - down) / (2.0 * eps);
  }
  return g;
}

std::size_t argmax_with_tolerance(const std::vector<double>& values, double tol) {
  if (values.empty()) throw std::invalid_argument("argmax of an empty list");
  const double best = *std::max_element(values.begin(), values.end());
  for (std::size_t i = 0; i < values.size(); ++i)
    if (values[i] >= best - tol) return i;
  return 0;
}

std::vector<double> clamped_bin_masses(double mean, double variance, const ApBounds& bounds,
                                       int bins) {
  const double sd = std::sqrt(variance);
  const double w = bounds.width() / bins;
  std::vector<double> mass(static_cast<std::size_t>(bins));
  double lower_cdf = 0.0;
  for (int b = 0; b < bins; ++b) {
    const double upper_cdf = b == bins - 1 ? 1.0 : std_normal_cdf((bounds.lo + (b + 1) * w - mean) / sd);
    mass[static_cast<std::size_t>(b)] = upper_cdf - lower_cdf;
    lower_cdf = upper_cdf;
  }
  return mass;
}

std::vector<double> clamped_bin_mass_derivatives(double mean, double variance,
                                                 const ApBounds& bounds, int bins) {
  const double sd = std::sqrt(variance);
  const double w = bounds.width() / bins;
  std::vector<double> d(static_cast<std::size_t>(bins));
  double lower = 0.0;  // d/dmean of the lower CDF value
  for (int b = 0; b < bins; ++b) {
    const double upper = b == bins - 1 ? 0.0 : -std_normal_pdf((bounds.lo + (b + 1) * w - mean) / sd) / sd;
    d[static_cast<std::size_t>(b)] = upper - lower;
    lower = upper;
  }
  return d;
}

namespace {

struct ContextTerms {
  double value = 0.0;
  Eigen::MatrixXd grad_alpha;
  Eigen::MatrixXd grad_omega;
};

ContextTerms context_terms(const BanditEnv& env, const TwoTieredPolicy& policy, int context,
                           ObjectiveKind kind, double zeta, bool with_grad) {
  const auto& cfg = env.config();
  const AugmentedState z{env.context_state(context), 0.0, 0};
  const std::vector<double> obs = observe(env, z, 1);
  const Eigen::VectorXd phi = policy.inter_map()(obs);
  const Eigen::VectorXd psi = policy.ad_map()(obs);
  const Eigen::VectorXd pi = option_probabilities(policy.inter(), phi);
  const auto& table = cfg.rewards[static_cast<std::size_t>(context)];

  auto objective = [&](double r) {
    return kind == ObjectiveKind::pg_smdp ? (r >= zeta ? 1.0 : 0.0) : r;
  };

  const auto n = static_cast<Eigen::Index>(policy.num_options());
  Eigen::VectorXd q(n);
  ContextTerms out;
  if (with_grad) {
    out.grad_alpha = Eigen::MatrixXd::Zero(policy.inter().alpha.rows(), policy.inter().alpha.cols());
    out.grad_omega = Eigen::MatrixXd::Zero(policy.ad().omega.rows(), policy.ad().omega.cols());
  }
  for (Eigen::Index o = 0; o < n; ++o) {
    const auto& row = table[static_cast<std::size_t>(o)];
    const auto& spec = policy.option_specs()[static_cast<std::size_t>(o)];
    if (!policy.samples_ap(static_cast<int>(o))) {
      const double ap = policy.greedy_ap(static_cast<int>(o), psi);
      q[o] = objective(row[static_cast<std::size_t>(env.bin_of(ap))]);
      continue;
    }
    const double mean = spec.offset + policy.ad_mean(static_cast<int>(o), psi);
    const auto mass = clamped_bin_masses(mean, policy.ad().variance, spec.bounds, cfg.bins);
    q[o] = 0.0;
    for (int b = 0; b < cfg.bins; ++b) q[o] += mass[static_cast<std::size_t>(b)] * objective(row[static_cast<std::size_t>(b)]);
    if (with_grad) {
      const auto dmass = clamped_bin_mass_derivatives(mean, policy.ad().variance, spec.bounds, cfg.bins);
      double dq = 0.0;
      for (int b = 0; b < cfg.bins; ++b)
        dq += dmass[static_cast<std::size_t>(b)] * objective(row[static_cast<std::size_t>(b)]);
      out.grad_omega.row(o) = pi[o] * dq * psi.transpose();
    }
  }
  out.value = pi.dot(q);
  if (with_grad)
    for (Eigen::Index j = 0; j < n; ++j) out.grad_alpha.row(j) = pi[j] * (q[j] - out.value) * phi.transpose();
  return out;
}

}  // namespace

BanditObjective bandit_objective(const BanditEnv& env, const TwoTieredPolicy& policy,
                                 ObjectiveKind kind, double zeta) {
  BanditObjective out;
  out.grad_alpha = Eigen::MatrixXd::Zero(policy.inter().alpha.rows(), policy.inter().alpha.cols());
  out.grad_omega = Eigen::MatrixXd::Zero(policy.ad().omega.rows(), policy.ad().omega.cols());
  const auto& probs = env.config().context_prob;
  for (std::size_t c = 0; c < probs.size(); ++c) {
    if (probs[c] == 0.0) continue;
    const ContextTerms t = context_terms(env, policy, static_cast<int>(c), kind, zeta, true);
    out.value += probs[c] * t.value;
    out.grad_alpha += probs[c] * t.grad_alpha;
    out.grad_omega += probs[c] * t.grad_omega;
  }
  return out;
}

double bandit_context_value(const BanditEnv& env, const TwoTieredPolicy& policy, int context,
                            ObjectiveKind kind, double zeta) {
  return context_terms(env, policy, context, kind, zeta, false).value;
}

MetricSummary mean_std(const std::string& label, const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("mean_std of an empty list");
  MetricSummary m{label, 0.0, 0.0};
  for (double v : values) m.mean += v;
  m.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - m.mean) * (v - m.mean);
    m.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return m;
}

std::vector<MetricSummary> aggregate_eval(const std::vector<std::vector<EpisodeRecord>>& trials,
                                          std::size_t window) {
  if (window == 0) throw std::invalid_argument("evaluation window must be positive");
  if (trials.empty()) throw std::invalid_argument("no trials to aggregate");
  std::vector<double> goals, timeouts, captures, successes, reward, length;
  for (const auto& trial : trials) {
    if (trial.empty()) throw std::invalid_argument("empty evaluation window");
    const std::size_t n = std::min(window, trial.size());
    double g = 0, o = 0, c = 0, s = 0, r = 0, l = 0;
    for (std::size_t i = trial.size() - n; i < trial.size(); ++i) {
      const auto& e = trial[i];
      g += e.event == "goal";
      o += e.event == "out_of_time";
      c += e.event == "captured";
      s += e.success;
      r += e.base_return;
      l += static_cast<double>(e.length);
    }
    goals.push_back(g);
    timeouts.push_back(o);
    captures.push_back(c);
    successes.push_back(s);
    reward.push_back(r / static_cast<double>(n));
    length.push_back(l / static_cast<double>(n));
  }
  return {mean_std("Goals", goals),         mean_std("Out of Time", timeouts),
          mean_std("Captures", captures),   mean_std("Successes", successes),
          mean_std("Avg Reward", reward),   mean_std("Episode Length", length)};
}

std::string metrics_csv(const std::vector<MetricSummary>& rows) {
  std::ostringstream os;
  os << "metric,mean,std\n";
  char buf[64];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, ",%.6f,%.6f\n", r.mean, r.std);
    os << r.label << buf;
  }
  return os.str();
}

}  // namespace sap
