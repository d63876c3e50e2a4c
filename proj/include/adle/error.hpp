#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace adle {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class NotPositiveDefinite : public Error {
 public:
  explicit NotPositiveDefinite(std::size_t agent);
  std::size_t agent() const { return agent_; }

 private:
  std::size_t agent_;
};

class NotGloballyObservable : public Error {
 public:
  explicit NotGloballyObservable(double smallest_eigenvalue);
  double smallest_eigenvalue() const { return smallest_eigenvalue_; }

 private:
  double smallest_eigenvalue_;
};

class InvalidGraph : public Error {
 public:
  using Error::Error;
};

class NotMeanConnected : public Error {
 public:
  explicit NotMeanConnected(double lambda2);
  double lambda2() const { return lambda2_; }

 private:
  double lambda2_;
};

/// One violated schedule inequality. `slack` is negative (or zero for a
/// strict inequality that holds with equality).
struct ScheduleIssue {
  std::string constraint;
  double slack;
};

class ScheduleViolation : public Error {
 public:
  explicit ScheduleViolation(std::vector<ScheduleIssue> issues);
  const std::vector<ScheduleIssue>& issues() const { return issues_; }

 private:
  std::vector<ScheduleIssue> issues_;
};

class InvalidExponent : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed config text or a field of the wrong shape. `line` is 0 when the
/// problem is tied to a field rather than a text position.
class ParseError : public Error {
 public:
  ParseError(std::string message, std::size_t line, std::string field);
  std::size_t line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  std::size_t line_;
  std::string field_;
};

/// Every model, topology and schedule failure found in a config.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

class InsufficientTrials : public Error {
 public:
  using Error::Error;
};

class NonPositiveValue : public Error {
 public:
  explicit NonPositiveValue(std::size_t index);
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

}  // namespace adle
