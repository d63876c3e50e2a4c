#include "adle/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include <fmt/format.h>

#include "adle/error.hpp"
#include "adle/stats.hpp"

namespace adle {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::vector<std::pair<double, double>> series(const std::vector<std::uint64_t>& times,
                                              const std::vector<double>& values) {
  std::vector<std::pair<double, double>> out;
  out.reserve(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) out.emplace_back(static_cast<double>(times[i]), values[i]);
  return out;
}

// Points with t >= t_last / 10.
std::vector<std::pair<double, double>> last_decade(const std::vector<std::pair<double, double>>& points) {
  const double cutoff = points.back().first / 10.0;
  std::vector<std::pair<double, double>> out;
  for (const auto& p : points) {
    if (p.first >= cutoff) out.push_back(p);
  }
  return out;
}

void add_check(ExperimentReport& report, std::string name, double value, std::string requirement, bool passed) {
  report.checks.push_back(AcceptanceCheck{std::move(name), value, std::move(requirement), passed});
}

}  // namespace

std::vector<std::uint64_t> checkpoint_times(std::uint64_t first, double ratio, std::uint64_t horizon) {
  if (first == 0) throw ConfigError("first checkpoint must be positive");
  if (!(ratio > 1.0)) throw ConfigError(fmt::format("checkpoint ratio {} must exceed 1", ratio));
  if (horizon < first) {
    throw ConfigError(fmt::format("horizon {} is before the first checkpoint {}", horizon, first));
  }
  std::vector<std::uint64_t> out;
  for (double mark = static_cast<double>(first); mark < static_cast<double>(horizon); mark *= ratio) {
    const auto t = static_cast<std::uint64_t>(std::llround(mark));
    if (out.empty() || t > out.back()) out.push_back(t);
  }
  if (out.empty() || out.back() < horizon) out.push_back(horizon);
  return out;
}

std::uint64_t trial_seed(std::uint64_t master_seed, std::uint64_t index) {
  return splitmix64(splitmix64(master_seed) ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

TrialMetrics run_trial(const Problem& problem, std::uint64_t horizon, std::span<const std::uint64_t> checkpoints,
                       std::uint64_t seed) {
  if (checkpoints.empty()) throw ConfigError("no checkpoints requested");
  if (!std::is_sorted(checkpoints.begin(), checkpoints.end()) ||
      std::adjacent_find(checkpoints.begin(), checkpoints.end()) != checkpoints.end()) {
    throw ConfigError("checkpoint times must be strictly increasing");
  }
  if (checkpoints.back() > horizon) {
    throw ConfigError(fmt::format("horizon {} is before the last checkpoint {}", horizon, checkpoints.back()));
  }
  if (checkpoints.front() == 0) throw ConfigError("checkpoints start after the first step");

  const auto& model = problem.model;
  Rng rng(seed);
  AdleEngine engine(problem);
  CentralizedEstimator baseline(model, problem.summary);
  NetworkState net = initial_state(model);
  TrialMetrics out;
  out.checkpoints.reserve(checkpoints.size());
  auto next = checkpoints.begin();

  while (net.step < horizon) {
    engine.step(net, rng);
    const auto& ys = engine.observations();
    for (std::size_t n = 0; n < ys.size(); ++n) baseline.add(n, ys[n]);
    baseline.advance();
    if (next != checkpoints.end() && net.step == *next) {
      auto diag = engine.diagnostics(net);
      for (double e : diag.errors) {
        if (!std::isfinite(e)) throw Error(fmt::format("estimate diverged at t = {}", net.step));
      }
      out.checkpoints.push_back(Checkpoint{net.step, diag.disagreement, std::move(diag.errors), diag.gain_gap,
                                           diag.grammian_gap});
      ++next;
    }
  }

  const double scale = std::sqrt(static_cast<double>(horizon) + 1.0);
  for (const auto& agent : net.agents) out.terminal_scaled_errors.push_back(scale * (agent.estimate - model.true_param));
  out.centralized_scaled_error =
      std::sqrt(static_cast<double>(baseline.slots())) * (baseline.estimate() - model.true_param);
  return out;
}

Matrix estimate_scaled_covariance(std::span<const TrialMetrics> trials, std::size_t agent) {
  if (trials.size() < 2) throw InsufficientTrials("scaled covariance needs at least two trials");
  std::vector<Vector> samples;
  samples.reserve(trials.size());
  for (const auto& trial : trials) samples.push_back(trial.terminal_scaled_errors.at(agent));
  return stats::sample_covariance(samples);
}

double fit_decay_slope(std::span<const std::pair<double, double>> points, double window) {
  if (!(window > 0.0 && window <= 1.0)) throw ConfigError(fmt::format("fit window {} outside (0, 1]", window));
  const auto count = static_cast<std::size_t>(std::ceil(window * static_cast<double>(points.size())));
  if (count < 5) throw ConfigError(fmt::format("fit window holds {} points, need at least 5", count));
  const auto first = points.size() - count;
  try {
    return stats::loglog_slope(points.subspan(first));
  } catch (const NonPositiveValue& e) {
    throw NonPositiveValue(first + e.index());
  }
}

bool ExperimentReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

ExperimentReport run_experiment(const Problem& problem, const ExperimentSettings& settings) {
  if (settings.num_trials == 0) throw ConfigError("num_trials must be positive");
  if (settings.num_trials < 2) throw InsufficientTrials("an experiment needs at least two trials");
  const auto times = checkpoint_times(settings.checkpoint_start, settings.checkpoint_ratio, settings.horizon);
  const auto& model = problem.model;
  const auto num_agents = model.num_agents();
  const auto& th = settings.thresholds;

  ExperimentReport report;
  report.num_trials = settings.num_trials;
  report.horizon = settings.horizon;
  report.master_seed = settings.master_seed;
  report.checkpoint_times = times;
  report.trials.resize(settings.num_trials);

  std::atomic<std::uint64_t> next_trial{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const auto k = next_trial.fetch_add(1);
      if (k >= settings.num_trials) return;
      try {
        report.trials[k] = run_trial(problem, settings.horizon, times, trial_seed(settings.master_seed, k));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next_trial = settings.num_trials;
        return;
      }
    }
  };
  const unsigned threads = std::max(1U, settings.threads);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  const auto& trials = report.trials;
  report.target_cov = problem.summary.asymptotic_cov;

  // Efficiency: per-agent scaled covariance against the inverse Grammian.
  for (std::size_t n = 0; n < num_agents; ++n) {
    report.empirical_scaled_cov.push_back(estimate_scaled_covariance(trials, n));
    report.rel_frobenius_gap.push_back(
        stats::relative_frobenius_gap(report.empirical_scaled_cov.back(), report.target_cov));
  }
  {
    std::vector<Vector> samples;
    for (const auto& trial : trials) samples.push_back(trial.centralized_scaled_error);
    report.centralized_cov = stats::sample_covariance(samples);
    report.centralized_gap = stats::relative_frobenius_gap(report.centralized_cov, report.target_cov);
  }
  const double worst_gap = *std::max_element(report.rel_frobenius_gap.begin(), report.rel_frobenius_gap.end());
  add_check(report, "efficiency_gap", worst_gap, fmt::format("max_n rel. Frobenius gap <= {}", th.efficiency_gap),
            worst_gap <= th.efficiency_gap);

  // Paired baseline: the distributed trace may not undercut the centralized
  // one by more than sampling noise.
  {
    const double k = static_cast<double>(settings.num_trials);
    const double tolerance = 4.0 * std::sqrt(2.0 / k) * report.target_cov.trace();
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& cov : report.empirical_scaled_cov) {
      worst = std::min(worst, cov.trace() - report.centralized_cov.trace());
    }
    add_check(report, "baseline_dominance", worst, fmt::format("min_n tr(C_n) - tr(C_c) >= -{:.6g}", tolerance),
              worst >= -tolerance);
  }

  // Median trajectories across trials.
  const auto num_points = times.size();
  std::vector<double> median_disagreement(num_points);
  std::vector<std::vector<double>> median_error(num_agents, std::vector<double>(num_points));
  std::vector<double> median_all_errors(num_points);
  for (std::size_t i = 0; i < num_points; ++i) {
    std::vector<double> dis, all;
    for (const auto& trial : trials) {
      dis.push_back(trial.checkpoints[i].disagreement);
      for (double e : trial.checkpoints[i].errors) all.push_back(e);
    }
    median_disagreement[i] = stats::median(dis);
    median_all_errors[i] = stats::median(all);
    for (std::size_t n = 0; n < num_agents; ++n) {
      std::vector<double> err;
      for (const auto& trial : trials) err.push_back(trial.checkpoints[i].errors[n]);
      median_error[n][i] = stats::median(err);
    }
  }

  // Consistency: order-optimal decay of the median error.
  double slope_lo = std::numeric_limits<double>::infinity();
  double slope_hi = -std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < num_agents; ++n) {
    const auto window = last_decade(series(times, median_error[n]));
    const double slope = window.size() >= 2 ? stats::loglog_slope(window) : 0.0;
    report.error_slopes.push_back(slope);
    slope_lo = std::min(slope_lo, slope);
    slope_hi = std::max(slope_hi, slope);
  }
  const bool slopes_ok = slope_lo >= th.error_slope_min && slope_hi <= th.error_slope_max;
  add_check(report, "error_slope_min", slope_lo, fmt::format(">= {}", th.error_slope_min), slopes_ok);
  add_check(report, "error_slope_max", slope_hi, fmt::format("<= {}", th.error_slope_max), slopes_ok);

  // Agreement: disagreement decays at rate tau0 and ends well below the error.
  const bool agreement_tau_ok = th.tau0 < problem.schedule.agreement_exponent_bound();
  {
    const auto points = series(times, median_disagreement);
    if (std::all_of(median_disagreement.begin(), median_disagreement.end(), [](double v) { return v == 0.0; })) {
      report.disagreement_slope = -std::numeric_limits<double>::infinity();
    } else {
      report.disagreement_slope = fit_decay_slope(points, settings.rate_window);
    }
  }
  add_check(report, "disagreement_slope", report.disagreement_slope,
            fmt::format("<= -{} (tau0 admissible: {})", th.tau0, agreement_tau_ok),
            agreement_tau_ok && report.disagreement_slope <= -th.tau0);
  report.final_disagreement_ratio = median_all_errors.back() > 0.0
                                        ? median_disagreement.back() / median_all_errors.back()
                                        : std::numeric_limits<double>::infinity();
  add_check(report, "final_disagreement_ratio", report.final_disagreement_ratio,
            fmt::format("< {}", th.disagreement_ratio), report.final_disagreement_ratio < th.disagreement_ratio);

  // Gain learning.
  {
    double largest_gain = 0.0;
    for (const auto& k : problem.summary.optimal_gains) largest_gain = std::max(largest_gain, k.norm());
    std::size_t passing = 0;
    std::vector<double> grammian_gaps;
    for (const auto& trial : trials) {
      if (trial.checkpoints.back().gain_gap <= th.gain_tolerance * largest_gain) ++passing;
      grammian_gaps.push_back(trial.checkpoints.back().grammian_gap);
    }
    report.gain_pass_fraction = static_cast<double>(passing) / static_cast<double>(trials.size());
    report.final_grammian_gap = stats::median(grammian_gaps);
  }
  add_check(report, "gain_pass_fraction", report.gain_pass_fraction,
            fmt::format(">= {} (gap <= {} max||K||)", th.gain_pass_fraction, th.gain_tolerance),
            report.gain_pass_fraction >= th.gain_pass_fraction);
  add_check(report, "grammian_gap", report.final_grammian_gap, fmt::format("< {}", th.grammian_gap),
            report.final_grammian_gap < th.grammian_gap);

  if (settings.run_ks_test) {
    const auto dim = model.param_dim();
    // Bonferroni over every (agent, coordinate) pair at family level 0.01.
    const double level = 0.01 / static_cast<double>(num_agents * static_cast<std::size_t>(dim));
    double worst = 1.0;
    for (std::size_t n = 0; n < num_agents; ++n) {
      double agent_min = 1.0;
      for (Eigen::Index i = 0; i < dim; ++i) {
        std::vector<double> coord;
        for (const auto& trial : trials) coord.push_back(trial.terminal_scaled_errors[n](i));
        agent_min = std::min(agent_min, stats::ks_test_normal(coord, report.target_cov(i, i)).second);
      }
      report.ks_min_pvalue.push_back(agent_min);
      worst = std::min(worst, agent_min);
    }
    add_check(report, "ks_normality", worst, fmt::format("min p-value >= {:.6g}", level), worst >= level);
  }
  return report;
}

}  // namespace adle
