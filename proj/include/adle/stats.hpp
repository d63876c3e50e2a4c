#pragma once

#include <span>
#include <utility>
#include <vector>

#include "adle/model.hpp"

// Small numeric helpers shared by the schedule oracle and the harness.
namespace adle::stats {

/// Least-squares slope of log(value) against log(t + 1). All values must be
/// positive; throws NonPositiveValue with the offending index otherwise.
double loglog_slope(std::span<const std::pair<double, double>> points);

double median(std::vector<double> values);

/// Mean-subtracted sample covariance (divisor n - 1) of the rows of `samples`.
Matrix sample_covariance(std::span<const Vector> samples);

/// ||a - b||_F / ||b||_F.
double relative_frobenius_gap(const Matrix& a, const Matrix& b);

/// One-sample Kolmogorov-Smirnov test against N(0, variance). Returns the
/// statistic D and the asymptotic p-value.
std::pair<double, double> ks_test_normal(std::vector<double> samples, double variance);

}  // namespace adle::stats
