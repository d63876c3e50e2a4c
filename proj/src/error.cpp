#include "adle/error.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

namespace adle {

namespace {

std::string describe(const std::vector<ScheduleIssue>& issues) {
  std::string out = "schedule violates its constraints:";
  for (const auto& issue : issues) {
    out += fmt::format(" [{} (slack {:.6g})]", issue.constraint, issue.slack);
  }
  return out;
}

}  // namespace

NotPositiveDefinite::NotPositiveDefinite(std::size_t agent)
    : Error(fmt::format("noise covariance of agent {} is not positive definite", agent)), agent_(agent) {}

NotGloballyObservable::NotGloballyObservable(double smallest_eigenvalue)
    : Error(fmt::format("observation model is not globally observable (smallest Grammian eigenvalue {:.6g})",
                        smallest_eigenvalue)),
      smallest_eigenvalue_(smallest_eigenvalue) {}

NotMeanConnected::NotMeanConnected(double lambda2)
    : Error(fmt::format("topology is not connected on average (lambda2 of mean Laplacian = {:.6g})", lambda2)),
      lambda2_(lambda2) {}

ScheduleViolation::ScheduleViolation(std::vector<ScheduleIssue> issues)
    : Error(describe(issues)), issues_(std::move(issues)) {}

ParseError::ParseError(std::string message, std::size_t line, std::string field)
    : Error(line > 0 ? fmt::format("line {}: {}", line, message)
                     : (field.empty() ? message : fmt::format("{}: {}", field, message))),
      line_(line),
      field_(std::move(field)) {}

ValidationError::ValidationError(std::vector<std::string> problems)
    : Error(fmt::format("invalid scenario ({} problem{}):\n  {}", problems.size(), problems.size() == 1 ? "" : "s",
                        fmt::join(problems, "\n  "))),
      problems_(std::move(problems)) {}

NonPositiveValue::NonPositiveValue(std::size_t index)
    : Error(fmt::format("non-positive value at checkpoint {} in fit window", index)), index_(index) {}

}  // namespace adle
