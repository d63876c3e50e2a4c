#include "adle/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "adle/error.hpp"
#include "adle/stats.hpp"

namespace adle {

double WeightSchedule::alpha(std::uint64_t t) const { return a / std::pow(static_cast<double>(t) + 1.0, tau1); }

double WeightSchedule::beta(std::uint64_t t) const { return b / std::pow(static_cast<double>(t) + 1.0, tau2); }

double WeightSchedule::gamma(std::uint64_t t) const {
  return gamma0 / std::pow(static_cast<double>(t) + 1.0, tau_gamma);
}

double WeightSchedule::timescale_slack() const { return tau1 - (tau2 + 1.0 / (2.0 + eps1) + 0.5); }

double WeightSchedule::agreement_exponent_bound() const { return tau1 - tau2 - 1.0 / (2.0 + eps1); }

WeightSchedule validate_schedule(const WeightSchedule& s, bool require_efficiency) {
  std::vector<ScheduleIssue> issues;
  auto require_positive = [&](double value, const char* name) {
    if (!(value > 0.0)) issues.push_back({fmt::format("{} > 0", name), value});
  };
  require_positive(s.a, "a");
  require_positive(s.b, "b");
  require_positive(s.gamma0, "gamma0");
  require_positive(s.tau_gamma, "tau_gamma");
  require_positive(s.eps1, "eps1");
  require_positive(s.tau2, "tau2");
  if (!(s.tau2 <= s.tau1)) issues.push_back({"tau2 <= tau1", s.tau1 - s.tau2});
  if (!(s.tau1 <= 1.0)) issues.push_back({"tau1 <= 1", 1.0 - s.tau1});
  if (s.eps1 > 0.0 && !(s.timescale_slack() > 0.0)) {
    issues.push_back({"tau1 > tau2 + 1/(2+eps1) + 1/2", s.timescale_slack()});
  }
  if (require_efficiency) {
    if (s.tau1 != 1.0) issues.push_back({"tau1 = 1 (efficiency)", s.tau1 - 1.0});
    if (s.a != 1.0) issues.push_back({"a = 1 (efficiency)", s.a - 1.0});
  } else if (s.tau1 == 1.0 && !(s.a >= 1.0)) {
    issues.push_back({"a >= 1 (consistency with tau1 = 1)", s.a - 1.0});
  }
  if (!issues.empty()) throw ScheduleViolation(std::move(issues));
  return s;
}

RecursionTrace deterministic_recursion_oracle(double delta1, double delta2, double a1, double a2,
                                              std::uint64_t horizon) {
  if (!(delta1 >= 0.0 && delta1 <= 1.0)) throw InvalidExponent(fmt::format("delta1 = {} outside [0, 1]", delta1));
  if (!(delta2 > 0.0)) throw InvalidExponent(fmt::format("delta2 = {} must be positive", delta2));
  if (!(a1 > 0.0) || !(a2 >= 0.0)) throw InvalidExponent("coefficients need a1 > 0 and a2 >= 0");
  if (horizon < 100) throw InvalidExponent("horizon must be at least 100 steps");

  RecursionTrace out;
  const std::uint64_t late_start = horizon / 10;
  const double ratio = std::pow(10.0, 1.0 / 8.0);
  double next_mark = 1.0;
  double z = 1.0;
  double late_min = std::numeric_limits<double>::infinity();
  double late_max = 0.0;
  out.max_value = z;
  std::vector<std::pair<double, double>> late_points;
  for (std::uint64_t t = 0; t < horizon; ++t) {
    const double tp1 = static_cast<double>(t) + 1.0;
    const double r1 = std::clamp(a1 / std::pow(tp1, delta1), 0.0, 1.0);
    const double r2 = a2 / std::pow(tp1, delta2);
    const double next = (1.0 - r1) * z + r2;
    if (next > z) out.nonincreasing = false;
    z = next;
    const auto step = t + 1;
    out.max_value = std::max(out.max_value, z);
    if (step >= late_start) {
      late_min = std::min(late_min, z);
      late_max = std::max(late_max, z);
    }
    if (static_cast<double>(step) >= next_mark || step == horizon) {
      out.checkpoints.emplace_back(static_cast<double>(step), z);
      if (step >= late_start) late_points.emplace_back(static_cast<double>(step), z);
      while (next_mark <= static_cast<double>(step)) next_mark *= ratio;
    }
  }
  out.late_max_min_ratio = late_min > 0.0 ? late_max / late_min : std::numeric_limits<double>::infinity();
  const bool positive = std::all_of(late_points.begin(), late_points.end(), [](auto p) { return p.second > 0.0; });
  out.slope = positive && late_points.size() >= 2 ? stats::loglog_slope(late_points)
                                                  : -std::numeric_limits<double>::infinity();
  return out;
}

}  // namespace adle
