#include "sap/schedule.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace sap {

double StepSchedule::a(std::uint64_t k) const {
  return a0 / std::pow(static_cast<double>(k) + offset, effective_power_a());
}

double StepSchedule::b(std::uint64_t k) const {
  return b0 / std::pow(static_cast<double>(k) + offset, effective_power_b());
}

std::optional<std::string> validate_schedule(const StepSchedule& s, std::uint64_t check_until) {
  if (!(s.a0 > 0.0) || !std::isfinite(s.a0)) return "a0 must be positive and finite";
  if (!(s.b0 > 0.0) || !std::isfinite(s.b0)) return "b0 must be positive and finite";
  if (!(s.offset >= 0.0) || !std::isfinite(s.offset)) return "offset must be >= 0";

  // A p-series sum 1/k^p diverges iff p <= 1 and its squares converge iff p > 1/2.
  const auto check_power = [](double p, const char* name) -> std::optional<std::string> {
    if (!std::isfinite(p)) return std::string(name) + " is not finite";
    if (p <= 0.5)
      return std::string("sum of squared ") + name + "-steps diverges (power " +
             std::to_string(p) + " <= 0.5)";
    if (p > 1.0)
      return std::string("sum of ") + name + "-steps converges (power " + std::to_string(p) +
             " > 1)";
    return std::nullopt;
  };
  if (auto v = check_power(s.effective_power_a(), "a")) return v;
  if (auto v = check_power(s.effective_power_b(), "b")) return v;

  for (std::uint64_t k = 1; k <= check_until; ++k) {
    if (!(s.b(k) > s.a(k))) {
      std::ostringstream os;
      os << "b_k must exceed a_k at every k; fails at k=" << k << " (a_k=" << s.a(k)
         << ", b_k=" << s.b(k) << ")";
      return os.str();
    }
  }
  return std::nullopt;
}

std::string to_string(ScheduleKind kind) {
  return kind == ScheduleKind::inverse_k ? "inverse-k" : "inverse-k-power";
}

ScheduleKind schedule_kind_from_string(const std::string& name) {
  if (name == "inverse-k") return ScheduleKind::inverse_k;
  if (name == "inverse-k-power") return ScheduleKind::inverse_k_power;
  throw std::invalid_argument("unknown schedule kind '" + name + "'");
}

}  // namespace sap
