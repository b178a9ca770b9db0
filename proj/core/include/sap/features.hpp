#pragma once

// Feature maps over observation vectors. An observation is the environment's
// variables followed by the generic channels "eta" and "t" (t / horizon).

#include <cstddef>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace sap {

struct VariableScaling {
  double lo = 0.0;
  double hi = 1.0;
};

using ScalingTable = std::map<std::string, VariableScaling>;

/// Observation channel names: environment variables then "eta", "t".
std::vector<std::string> observation_channels(const std::vector<std::string>& env_variables);

class FeatureMap {
 public:
  virtual ~FeatureMap() = default;

  virtual std::size_t dim() const = 0;
  /// Number of observation channels this map was built against.
  virtual std::size_t input_size() const = 0;
  virtual void evaluate(std::span<const double> obs, Eigen::Ref<Eigen::VectorXd> out) const = 0;
  /// Stable textual description; part of checkpoint compatibility checks.
  virtual std::string describe() const = 0;

  Eigen::VectorXd operator()(std::span<const double> obs) const {
    Eigen::VectorXd out(static_cast<Eigen::Index>(dim()));
    evaluate(obs, out);
    return out;
  }
};

/// Cosine Fourier basis cos(pi * c . x) over every coefficient vector
/// c in {0..order}^k, with inputs normalized into [0, 1] and clamped.
class FourierFeatureMap final : public FeatureMap {
 public:
  FourierFeatureMap(int order, std::vector<std::size_t> inputs, std::vector<VariableScaling> scaling,
                    std::size_t input_size, std::vector<std::string> input_names = {});

  std::size_t dim() const override { return coefficients_.size(); }
  std::size_t input_size() const override { return input_size_; }
  void evaluate(std::span<const double> obs, Eigen::Ref<Eigen::VectorXd> out) const override;
  std::string describe() const override;

  int order() const { return order_; }
  const std::vector<std::vector<int>>& coefficients() const { return coefficients_; }

 private:
  int order_;
  std::vector<std::size_t> inputs_;
  std::vector<VariableScaling> scaling_;
  std::size_t input_size_;
  std::vector<std::string> names_;
  std::vector<std::vector<int>> coefficients_;
};

/// Polynomial terms such as "1", "x", "y^2", "x*eta". The first term must be
/// the constant "1". Variables that have a scaling entry are mapped affinely
/// onto [0, 1] (unclamped) before the product is taken.
class LinearFeatureMap final : public FeatureMap {
 public:
  LinearFeatureMap(const std::vector<std::string>& terms, const std::vector<std::string>& channels,
                   const ScalingTable& scaling = {});

  std::size_t dim() const override { return terms_.size(); }
  std::size_t input_size() const override { return input_size_; }
  void evaluate(std::span<const double> obs, Eigen::Ref<Eigen::VectorXd> out) const override;
  std::string describe() const override;

  const std::vector<std::string>& term_names() const { return names_; }

 private:
  struct Factor {
    std::size_t channel;
    int power;
    double offset;
    double scale;
  };
  std::vector<std::vector<Factor>> terms_;
  std::vector<std::string> names_;
  std::size_t input_size_;
};

struct FeatureSpec {
  std::string kind = "linear";  // "linear" | "fourier"
  int order = 3;
  std::vector<std::string> inputs;  // fourier
  std::vector<std::string> terms{"1"};  // linear
};

/// Builds a feature map, resolving names against `channels`. Throws
/// std::invalid_argument on unknown variables or malformed terms.
std::shared_ptr<const FeatureMap> make_feature_map(const FeatureSpec& spec,
                                                   const std::vector<std::string>& channels,
                                                   const ScalingTable& scaling);

}  // namespace sap
