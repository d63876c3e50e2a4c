#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "adle/adle.hpp"

namespace adle {

struct Checkpoint {
  std::uint64_t t = 0;
  double disagreement = 0.0;
  std::vector<double> errors;
  double gain_gap = 0.0;
  double grammian_gap = 0.0;
};

struct TrialMetrics {
  std::vector<Checkpoint> checkpoints;
  std::vector<Vector> terminal_scaled_errors;  // sqrt(T+1) (x_n(T) - theta*)
  Vector centralized_scaled_error;             // same noise, batch least squares
};

/// Geometric grid first, first*ratio, ... rounded to integers, deduplicated
/// and closed with `horizon`. Throws ConfigError if horizon < first.
std::vector<std::uint64_t> checkpoint_times(std::uint64_t first, double ratio, std::uint64_t horizon);

/// Seed of trial `index` derived from the master seed, independent of which
/// other trials run.
std::uint64_t trial_seed(std::uint64_t master_seed, std::uint64_t index);

/// Runs `horizon` steps from the initial state. Metrics are recorded at every
/// time in `checkpoints` (state after that many steps).
TrialMetrics run_trial(const Problem& problem, std::uint64_t horizon, std::span<const std::uint64_t> checkpoints,
                       std::uint64_t seed);

/// Sample covariance across trials of the terminal scaled error of `agent`.
Matrix estimate_scaled_covariance(std::span<const TrialMetrics> trials, std::size_t agent);

/// Least-squares slope of log(value) vs log(t+1) over the last
/// `window` fraction of the points (at least 5 points required).
double fit_decay_slope(std::span<const std::pair<double, double>> points, double window);

struct AcceptanceThresholds {
  double efficiency_gap = 0.20;
  double error_slope_min = -0.6;
  double error_slope_max = -0.4;
  double tau0 = 0.3;
  double disagreement_ratio = 0.10;
  double gain_tolerance = 0.05;
  double gain_pass_fraction = 0.95;
  double grammian_gap = 0.05;
};

struct ExperimentSettings {
  std::uint64_t horizon = 50'000;
  std::uint64_t num_trials = 100;
  std::uint64_t master_seed = 1;
  std::uint64_t checkpoint_start = 10;
  double checkpoint_ratio = 1.333521432163324;  // 10^(1/8)
  double rate_window = 0.4;
  unsigned threads = 1;
  bool run_ks_test = false;
  AcceptanceThresholds thresholds;
};

struct AcceptanceCheck {
  std::string name;
  double value = 0.0;
  std::string requirement;
  bool passed = false;
};

struct ExperimentReport {
  std::uint64_t num_trials = 0;
  std::uint64_t horizon = 0;
  std::uint64_t master_seed = 0;
  std::vector<std::uint64_t> checkpoint_times;
  std::vector<Matrix> empirical_scaled_cov;
  Matrix target_cov;
  std::vector<double> rel_frobenius_gap;
  Matrix centralized_cov;
  double centralized_gap = 0.0;
  double disagreement_slope = 0.0;
  std::vector<double> error_slopes;       // median error, last decade
  double final_disagreement_ratio = 0.0;  // median disagreement / median error at T
  double gain_pass_fraction = 0.0;
  double final_grammian_gap = 0.0;        // median over trials at T
  std::vector<double> ks_min_pvalue;      // per agent, empty unless requested
  std::vector<AcceptanceCheck> checks;
  std::vector<TrialMetrics> trials;

  bool all_passed() const;
};

/// Runs all trials (on `threads` workers), then folds them in trial order.
/// Any trial failure aborts the experiment.
ExperimentReport run_experiment(const Problem& problem, const ExperimentSettings& settings);

}  // namespace adle
