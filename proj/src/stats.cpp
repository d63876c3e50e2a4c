#include "adle/stats.hpp"

#include <algorithm>
#include <cmath>

#include "adle/error.hpp"

namespace adle::stats {

double loglog_slope(std::span<const std::pair<double, double>> points) {
  if (points.size() < 2) throw Error("slope fit needs at least two points");
  double sx = 0.0, sy = 0.0;
  std::vector<std::pair<double, double>> logs;
  logs.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto [t, v] = points[i];
    if (!(v > 0.0)) throw NonPositiveValue(i);
    logs.emplace_back(std::log(t + 1.0), std::log(v));
    sx += logs.back().first;
    sy += logs.back().second;
  }
  const double n = static_cast<double>(points.size());
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : logs) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  if (sxx <= 0.0) throw Error("slope fit needs distinct abscissae");
  return sxy / sxx;
}

double median(std::vector<double> values) {
  if (values.empty()) throw Error("median of empty set");
  const auto mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

Matrix sample_covariance(std::span<const Vector> samples) {
  if (samples.size() < 2) throw InsufficientTrials("covariance needs at least two samples");
  const auto dim = samples.front().size();
  Vector mean = Vector::Zero(dim);
  for (const auto& s : samples) mean += s;
  mean /= static_cast<double>(samples.size());
  Matrix cov = Matrix::Zero(dim, dim);
  for (const auto& s : samples) {
    const Vector d = s - mean;
    cov.noalias() += d * d.transpose();
  }
  cov /= static_cast<double>(samples.size() - 1);
  return cov;
}

double relative_frobenius_gap(const Matrix& a, const Matrix& b) { return (a - b).norm() / b.norm(); }

std::pair<double, double> ks_test_normal(std::vector<double> samples, double variance) {
  if (samples.empty()) throw Error("KS test on empty sample");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  const double scale = std::sqrt(2.0 * variance);
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double cdf = 0.5 * std::erfc(-samples[i] / scale);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - cdf, cdf - static_cast<double>(i) / n});
  }
  // Kolmogorov limit distribution with the Stephens small-sample correction.
  const double lambda = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d;
  double p = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = 2.0 * ((k % 2 == 1) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
    p += term;
    if (std::abs(term) < 1e-12) break;
  }
  return {d, std::clamp(p, 0.0, 1.0)};
}

}  // namespace adle::stats
