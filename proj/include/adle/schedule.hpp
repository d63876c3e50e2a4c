#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace adle {

/// Step-size laws of the estimator:
///   alpha_t = a / (t+1)^tau1        innovation weight
///   beta_t  = b / (t+1)^tau2        consensus weight
///   gamma_t = gamma0 / (t+1)^tau_gamma   gain regularizer
/// `eps1` is the assumed noise moment margin: E|noise|^(2+eps1) < inf.
struct WeightSchedule {
  double a = 1.0;
  double b = 1.0;
  double tau1 = 1.0;
  double tau2 = 0.2;
  double gamma0 = 1.0;
  double tau_gamma = 0.75;
  double eps1 = 6.0;

  double alpha(std::uint64_t t) const;
  double beta(std::uint64_t t) const;
  double gamma(std::uint64_t t) const;

  /// tau1 - (tau2 + 1/(2+eps1) + 1/2); the time-scale condition needs it > 0.
  double timescale_slack() const;
  /// Upper bound (exclusive) on the agreement rate exponent tau0.
  double agreement_exponent_bound() const;
};

/// Checks the step-size constraints and returns the schedule unchanged. With
/// `require_efficiency` it additionally demands tau1 = 1 and a = 1; otherwise
/// tau1 = 1 runs need a >= 1. Throws ScheduleViolation listing every failure.
WeightSchedule validate_schedule(const WeightSchedule& schedule, bool require_efficiency);

/// Result of iterating z_{t+1} = (1 - r1(t)) z_t + r2(t) with
/// r1(t) = a1/(t+1)^delta1 (clamped to [0,1]) and r2(t) = a2/(t+1)^delta2.
struct RecursionTrace {
  double slope = 0.0;          // log-log slope of z_t over the last decade
  double max_value = 0.0;      // max z_t over the whole horizon
  double late_max_min_ratio = 0.0;  // max/min of z_t over the last decade
  bool nonincreasing = true;
  std::vector<std::pair<double, double>> checkpoints;  // (t, z_t), geometric grid
};

/// Deterministic comparison recursion from z_0 = 1. Throws InvalidExponent
/// unless 0 <= delta1 <= 1, delta2 > 0, a1 > 0, a2 >= 0 and horizon >= 100.
RecursionTrace deterministic_recursion_oracle(double delta1, double delta2, double a1, double a2,
                                              std::uint64_t horizon);

}  // namespace adle
