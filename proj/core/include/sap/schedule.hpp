#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace sap {

enum class ScheduleKind {
  inverse_k,        // a0 / (k + offset),        b0 / (k + offset)
  inverse_k_power,  // a0 / (k + offset)^power_a, b0 / (k + offset)^power_b
};

/// Two-timescale step sequences: a_k drives the inter-option parameters,
/// b_k (the faster one) drives the awareness parameters. k starts at 1.
struct StepSchedule {
  ScheduleKind kind = ScheduleKind::inverse_k_power;
  double a0 = 0.01;
  double b0 = 0.1;
  double power_a = 1.0;
  double power_b = 0.6;
  /// Shift of the iteration index; delays the decay without changing the
  /// summability class.
  double offset = 0.0;

  double a(std::uint64_t k) const;
  double b(std::uint64_t k) const;
  double effective_power_a() const { return kind == ScheduleKind::inverse_k ? 1.0 : power_a; }
  double effective_power_b() const { return kind == ScheduleKind::inverse_k ? 1.0 : power_b; }
};

/// Empty when the schedule satisfies sum a = sum b = inf, sum a^2, sum b^2
/// finite and b_k > a_k (checked numerically for k = 1..check_until);
/// otherwise a description of the first violated condition.
std::optional<std::string> validate_schedule(const StepSchedule& s,
                                             std::uint64_t check_until = 1'000'000);

std::string to_string(ScheduleKind kind);
/// Throws std::invalid_argument for unknown names.
ScheduleKind schedule_kind_from_string(const std::string& name);

}  // namespace sap
