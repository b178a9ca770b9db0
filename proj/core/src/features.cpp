#include "sap/features.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace sap {
namespace {

std::size_t channel_index(const std::vector<std::string>& channels, const std::string& name) {
  auto it = std::find(channels.begin(), channels.end(), name);
  if (it == channels.end()) throw std::invalid_argument("unknown variable '" + name + "'");
  return static_cast<std::size_t>(it - channels.begin());
}

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

}  // namespace

std::vector<std::string> observation_channels(const std::vector<std::string>& env_variables) {
  std::vector<std::string> out = env_variables;
  out.emplace_back("eta");
  out.emplace_back("t");
  return out;
}

FourierFeatureMap::FourierFeatureMap(int order, std::vector<std::size_t> inputs,
                                     std::vector<VariableScaling> scaling, std::size_t input_size,
                                     std::vector<std::string> input_names)
    : order_(order),
      inputs_(std::move(inputs)),
      scaling_(std::move(scaling)),
      input_size_(input_size),
      names_(std::move(input_names)) {
  if (order_ < 1) throw std::invalid_argument("fourier order must be >= 1");
  if (inputs_.empty()) throw std::invalid_argument("fourier basis needs at least one input");
  if (scaling_.size() != inputs_.size())
    throw std::invalid_argument("fourier basis needs one scaling per input");
  for (const auto& s : scaling_)
    if (!(s.hi > s.lo)) throw std::invalid_argument("fourier scaling requires hi > lo");
  for (auto i : inputs_)
    if (i >= input_size_) throw std::invalid_argument("fourier input index out of range");

  // Enumerate {0..order}^k in odometer order, first input varying slowest.
  const std::size_t k = inputs_.size();
  std::vector<int> c(k, 0);
  while (true) {
    coefficients_.push_back(c);
    std::size_t pos = k;
    while (pos > 0) {
      --pos;
      if (++c[pos] <= order_) break;
      c[pos] = 0;
      if (pos == 0) return;
    }
  }
}

void FourierFeatureMap::evaluate(std::span<const double> obs,
                                 Eigen::Ref<Eigen::VectorXd> out) const {
  if (obs.size() != input_size_) throw std::invalid_argument("observation size mismatch");
  double x[16];
  const std::size_t k = inputs_.size();
  std::vector<double> heap;
  double* xs = x;
  if (k > 16) {
    heap.resize(k);
    xs = heap.data();
  }
  for (std::size_t j = 0; j < k; ++j) {
    const auto& s = scaling_[j];
    const double v = (obs[inputs_[j]] - s.lo) / (s.hi - s.lo);
    xs[j] = std::clamp(v, 0.0, 1.0);
  }
  for (std::size_t i = 0; i < coefficients_.size(); ++i) {
    double dot = 0.0;
    for (std::size_t j = 0; j < k; ++j) dot += coefficients_[i][j] * xs[j];
    out[static_cast<Eigen::Index>(i)] = std::cos(std::numbers::pi * dot);
  }
}

std::string FourierFeatureMap::describe() const {
  std::ostringstream os;
  os << "fourier(order=" << order_ << ";";
  for (std::size_t j = 0; j < inputs_.size(); ++j) {
    os << (names_.size() == inputs_.size() ? names_[j] : std::to_string(inputs_[j])) << "["
       << scaling_[j].lo << "," << scaling_[j].hi << "]";
    if (j + 1 < inputs_.size()) os << ",";
  }
  os << ")";
  return os.str();
}

LinearFeatureMap::LinearFeatureMap(const std::vector<std::string>& terms,
                                   const std::vector<std::string>& channels,
                                   const ScalingTable& scaling)
    : input_size_(channels.size()) {
  if (terms.empty() || trim(terms.front()) != "1")
    throw std::invalid_argument("linear feature list must start with the constant term \"1\"");
  for (const auto& raw : terms) {
    const std::string term = trim(raw);
    names_.push_back(term);
    std::vector<Factor> factors;
    if (term == "1") {
      terms_.push_back(std::move(factors));
      continue;
    }
    std::stringstream ss(term);
    std::string piece;
    while (std::getline(ss, piece, '*')) {
      piece = trim(piece);
      if (piece.empty()) throw std::invalid_argument("malformed feature term '" + term + "'");
      int power = 1;
      std::string var = piece;
      if (auto caret = piece.find('^'); caret != std::string::npos) {
        var = trim(piece.substr(0, caret));
        try {
          power = std::stoi(piece.substr(caret + 1));
        } catch (const std::exception&) {
          throw std::invalid_argument("malformed power in feature term '" + term + "'");
        }
        if (power < 1 || power > 8)
          throw std::invalid_argument("feature power out of range in '" + term + "'");
      }
      Factor f{channel_index(channels, var), power, 0.0, 1.0};
      if (auto it = scaling.find(var); it != scaling.end()) {
        if (!(it->second.hi > it->second.lo))
          throw std::invalid_argument("scaling for '" + var + "' requires hi > lo");
        f.offset = it->second.lo;
        f.scale = 1.0 / (it->second.hi - it->second.lo);
      }
      factors.push_back(f);
    }
    terms_.push_back(std::move(factors));
  }
}

void LinearFeatureMap::evaluate(std::span<const double> obs,
                                Eigen::Ref<Eigen::VectorXd> out) const {
  if (obs.size() != input_size_) throw std::invalid_argument("observation size mismatch");
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    double v = 1.0;
    for (const auto& f : terms_[i]) {
      const double x = (obs[f.channel] - f.offset) * f.scale;
      for (int p = 0; p < f.power; ++p) v *= x;
    }
    out[static_cast<Eigen::Index>(i)] = v;
  }
}

std::string LinearFeatureMap::describe() const {
  std::ostringstream os;
  os << "linear(";
  for (std::size_t i = 0; i < names_.size(); ++i) {
    os << names_[i];
    for (const auto& f : terms_[i])
      if (f.offset != 0.0 || f.scale != 1.0) os << "{" << f.offset << "," << f.scale << "}";
    if (i + 1 < names_.size()) os << ",";
  }
  os << ")";
  return os.str();
}

std::shared_ptr<const FeatureMap> make_feature_map(const FeatureSpec& spec,
                                                   const std::vector<std::string>& channels,
                                                   const ScalingTable& scaling) {
  if (spec.kind == "linear") return std::make_shared<LinearFeatureMap>(spec.terms, channels, scaling);
  if (spec.kind == "fourier") {
    std::vector<std::size_t> idx;
    std::vector<VariableScaling> sc;
    for (const auto& name : spec.inputs) {
      idx.push_back(channel_index(channels, name));
      auto it = scaling.find(name);
      if (it == scaling.end())
        throw std::invalid_argument("fourier input '" + name + "' needs a scaling range");
      sc.push_back(it->second);
    }
    return std::make_shared<FourierFeatureMap>(spec.order, std::move(idx), std::move(sc),
                                               channels.size(), spec.inputs);
  }
  throw std::invalid_argument("unknown feature kind '" + spec.kind + "'");
}

}  // namespace sap
