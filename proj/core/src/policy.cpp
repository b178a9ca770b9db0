#include "sap/policy.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

namespace sap {
namespace {

bool available(OptionMask mask, Eigen::Index o) {
  return mask.empty() || mask[static_cast<std::size_t>(o)] != 0;
}

void check_dims(const InterOptionParams& params, const Eigen::VectorXd& phi, OptionMask mask) {
  if (params.alpha.cols() != phi.size())
    throw std::invalid_argument("inter-option feature dimension mismatch");
  if (params.alpha.rows() == 0) throw std::invalid_argument("policy has no options");
  if (!mask.empty() && mask.size() != static_cast<std::size_t>(params.alpha.rows()))
    throw std::invalid_argument("option mask size mismatch");
}

}  // namespace

Eigen::VectorXd option_probabilities(const InterOptionParams& params, const Eigen::VectorXd& phi,
                                     OptionMask mask) {
  check_dims(params, phi, mask);
  const Eigen::VectorXd scores = params.alpha * phi;
  double top = -std::numeric_limits<double>::infinity();
  for (Eigen::Index o = 0; o < scores.size(); ++o)
    if (available(mask, o)) top = std::max(top, scores[o]);
  if (!std::isfinite(top)) throw std::invalid_argument("no option available in this state");

  Eigen::VectorXd p = Eigen::VectorXd::Zero(scores.size());
  double total = 0.0;
  for (Eigen::Index o = 0; o < scores.size(); ++o) {
    if (!available(mask, o)) continue;
    p[o] = std::exp(scores[o] - top);
    total += p[o];
  }
  return p / total;
}

int sample_option(const InterOptionParams& params, const Eigen::VectorXd& phi, Rng& rng,
                  OptionMask mask) {
  const Eigen::VectorXd p = option_probabilities(params, phi, mask);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = unit(rng);
  double acc = 0.0;
  int last = -1;
  for (Eigen::Index o = 0; o < p.size(); ++o) {
    if (p[o] <= 0.0) continue;
    last = static_cast<int>(o);
    acc += p[o];
    if (u < acc) return last;
  }
  return last;
}

ApSample sample_ap(const Eigen::Ref<const Eigen::VectorXd>& omega_i, const Eigen::VectorXd& psi,
                   double variance, const ApBounds& bounds, Rng& rng, double offset) {
  if (!(variance > 0.0)) throw std::invalid_argument("AD variance must be positive");
  if (omega_i.size() != psi.size()) throw std::invalid_argument("AD feature dimension mismatch");
  std::normal_distribution<double> noise(0.0, 1.0);
  const double raw = offset + omega_i.dot(psi) + std::sqrt(variance) * noise(rng);
  return {raw, bounds.clamp(raw)};
}

double log_option_probability(const InterOptionParams& params, const Eigen::VectorXd& phi,
                              int option, OptionMask mask) {
  check_dims(params, phi, mask);
  if (option < 0 || option >= params.alpha.rows() || !available(mask, option))
    throw std::invalid_argument("option not available");
  const Eigen::VectorXd scores = params.alpha * phi;
  double top = -std::numeric_limits<double>::infinity();
  for (Eigen::Index o = 0; o < scores.size(); ++o)
    if (available(mask, o)) top = std::max(top, scores[o]);
  double total = 0.0;
  for (Eigen::Index o = 0; o < scores.size(); ++o)
    if (available(mask, o)) total += std::exp(scores[o] - top);
  return scores[option] - top - std::log(total);
}

Eigen::MatrixXd log_prob_grad_alpha(const InterOptionParams& params, const Eigen::VectorXd& phi,
                                    int option, OptionMask mask) {
  const Eigen::VectorXd p = option_probabilities(params, phi, mask);
  if (option < 0 || option >= p.size() || p[option] <= 0.0)
    throw std::invalid_argument("option not available");
  Eigen::MatrixXd grad = -p * phi.transpose();
  grad.row(option) += phi.transpose();
  return grad;
}

double log_ap_density(const AwarenessDistParams& params, const Eigen::VectorXd& psi, int option,
                      double raw_ap, double offset) {
  const double mean = offset + params.omega.row(option).dot(psi);
  const double d = raw_ap - mean;
  return -0.5 * d * d / params.variance - 0.5 * std::log(2.0 * std::numbers::pi * params.variance);
}

Eigen::VectorXd gaussian_score(const Eigen::Ref<const Eigen::VectorXd>& omega_i,
                               const Eigen::VectorXd& psi, double raw_ap, double variance,
                               double offset) {
  if (!(variance > 0.0)) throw std::invalid_argument("AD variance must be positive");
  if (omega_i.size() != psi.size()) throw std::invalid_argument("AD feature dimension mismatch");
  const double mean = offset + omega_i.dot(psi);
  return ((raw_ap - mean) / variance) * psi;
}

Eigen::MatrixXd log_prob_grad_omega(const AwarenessDistParams& params, const Eigen::VectorXd& psi,
                                    int option, double raw_ap, double offset) {
  if (option < 0 || option >= params.omega.rows()) throw std::invalid_argument("bad option id");
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(params.omega.rows(), params.omega.cols());
  grad.row(option) =
      gaussian_score(params.omega.row(option).transpose(), psi, raw_ap, params.variance, offset)
          .transpose();
  return grad;
}

TwoTieredPolicy::TwoTieredPolicy(std::shared_ptr<const FeatureMap> inter_features,
                                 std::shared_ptr<const FeatureMap> ad_features,
                                 std::vector<OptionApSpec> options, double variance)
    : inter_map_(std::move(inter_features)),
      ad_map_(std::move(ad_features)),
      options_(std::move(options)) {
  if (!inter_map_ || !ad_map_) throw std::invalid_argument("policy needs both feature maps");
  if (options_.empty()) throw std::invalid_argument("policy needs at least one option");
  if (!(variance > 0.0)) throw std::invalid_argument("AD variance must be positive");
  const auto n = static_cast<Eigen::Index>(options_.size());
  inter_.alpha = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(inter_map_->dim()));
  ad_.omega = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(ad_map_->dim()));
  ad_.variance = variance;
}

double TwoTieredPolicy::ad_mean(int option, const Eigen::VectorXd& psi) const {
  return ad_.omega.row(option).dot(psi);
}

double TwoTieredPolicy::greedy_ap(int option, const Eigen::VectorXd& psi) const {
  const auto& spec = options_[static_cast<std::size_t>(option)];
  if (!samples_ap(option)) return spec.bounds.clamp(spec.offset);
  return spec.bounds.clamp(spec.offset + ad_mean(option, psi));
}

ApSample TwoTieredPolicy::draw_ap(int option, const Eigen::VectorXd& psi, Rng& rng) const {
  const auto& spec = options_[static_cast<std::size_t>(option)];
  if (!samples_ap(option)) {
    const double c = spec.bounds.clamp(spec.offset);
    return {c, c};
  }
  return sample_ap(ad_.omega.row(option).transpose(), psi, ad_.variance, spec.bounds, rng,
                   spec.offset);
}

void TwoTieredPolicy::check_compatible(const TwoTieredPolicy& other) const {
  if (num_options() != other.num_options() ||
      inter_.alpha.rows() != other.inter_.alpha.rows() ||
      inter_.alpha.cols() != other.inter_.alpha.cols() ||
      ad_.omega.rows() != other.ad_.omega.rows() || ad_.omega.cols() != other.ad_.omega.cols())
    throw std::invalid_argument("policy parameter shapes differ");
}

}  // namespace sap
