#pragma once

// Two-tiered option selection: a Gibbs inter-option policy over options and
// one fixed-variance Gaussian awareness distribution per option.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "sap/features.hpp"
#include "sap/pg_smdp.hpp"

namespace sap {

/// One row of weights per option over the inter-option feature map.
struct InterOptionParams {
  Eigen::MatrixXd alpha;

  std::size_t num_options() const { return static_cast<std::size_t>(alpha.rows()); }
  std::size_t feature_dim() const { return static_cast<std::size_t>(alpha.cols()); }
};

/// One row w_o per option over the awareness feature map; variance is fixed.
struct AwarenessDistParams {
  Eigen::MatrixXd omega;
  double variance = 1.0;
};

/// Availability flags per option; an empty mask means every option may start.
using OptionMask = std::span<const std::uint8_t>;

struct ApSample {
  double raw = 0.0;
  double clamped = 0.0;
};

/// Softmax of alpha * phi restricted to available options (unit temperature).
Eigen::VectorXd option_probabilities(const InterOptionParams& params, const Eigen::VectorXd& phi,
                                     OptionMask mask = {});

int sample_option(const InterOptionParams& params, const Eigen::VectorXd& phi, Rng& rng,
                  OptionMask mask = {});

/// Draws raw ~ N(psi . w + offset, variance) and clamps it into `bounds`.
ApSample sample_ap(const Eigen::Ref<const Eigen::VectorXd>& omega_i, const Eigen::VectorXd& psi,
                   double variance, const ApBounds& bounds, Rng& rng, double offset = 0.0);

double log_option_probability(const InterOptionParams& params, const Eigen::VectorXd& phi,
                              int option, OptionMask mask = {});

/// Score of the Gibbs policy: phi in the chosen row minus the
/// probability-weighted phi in every available row.
Eigen::MatrixXd log_prob_grad_alpha(const InterOptionParams& params, const Eigen::VectorXd& phi,
                                    int option, OptionMask mask = {});

/// Gaussian log density of a raw AP draw under option `option`'s AD.
double log_ap_density(const AwarenessDistParams& params, const Eigen::VectorXd& psi, int option,
                      double raw_ap, double offset = 0.0);

/// ((c - mean) / V) * psi for a single option's weight vector.
Eigen::VectorXd gaussian_score(const Eigen::Ref<const Eigen::VectorXd>& omega_i,
                               const Eigen::VectorXd& psi, double raw_ap, double variance,
                               double offset = 0.0);

/// Full-Omega score: the Gaussian score in row `option`, zeros elsewhere.
Eigen::MatrixXd log_prob_grad_omega(const AwarenessDistParams& params, const Eigen::VectorXd& psi,
                                    int option, double raw_ap, double offset = 0.0);

struct OptionApSpec {
  ApBounds bounds;
  double offset = 0.0;
  bool uses_ap = true;
};

class TwoTieredPolicy {
 public:
  TwoTieredPolicy() = default;
  TwoTieredPolicy(std::shared_ptr<const FeatureMap> inter_features,
                  std::shared_ptr<const FeatureMap> ad_features, std::vector<OptionApSpec> options,
                  double variance);

  std::size_t num_options() const { return options_.size(); }
  const FeatureMap& inter_map() const { return *inter_map_; }
  const FeatureMap& ad_map() const { return *ad_map_; }
  std::shared_ptr<const FeatureMap> inter_map_ptr() const { return inter_map_; }
  std::shared_ptr<const FeatureMap> ad_map_ptr() const { return ad_map_; }
  const std::vector<OptionApSpec>& option_specs() const { return options_; }

  InterOptionParams& inter() { return inter_; }
  const InterOptionParams& inter() const { return inter_; }
  AwarenessDistParams& ad() { return ad_; }
  const AwarenessDistParams& ad() const { return ad_; }

  /// When false the AP is pinned to each option's offset and never sampled.
  bool awareness_enabled() const { return awareness_; }
  void set_awareness_enabled(bool on) { awareness_ = on; }

  /// True when option `o` draws an AP under the current settings.
  bool samples_ap(int o) const { return awareness_ && options_[static_cast<std::size_t>(o)].uses_ap; }

  /// psi . w_o (without the offset).
  double ad_mean(int option, const Eigen::VectorXd& psi) const;
  /// AP the environment sees when acting greedily: clamp(offset + mean).
  double greedy_ap(int option, const Eigen::VectorXd& psi) const;
  ApSample draw_ap(int option, const Eigen::VectorXd& psi, Rng& rng) const;

  /// Throws std::invalid_argument on non-matching dimensions.
  void check_compatible(const TwoTieredPolicy& other) const;

 private:
  std::shared_ptr<const FeatureMap> inter_map_;
  std::shared_ptr<const FeatureMap> ad_map_;
  std::vector<OptionApSpec> options_;
  InterOptionParams inter_;
  AwarenessDistParams ad_;
  bool awareness_ = true;
};

}  // namespace sap
