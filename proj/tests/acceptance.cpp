// Acceptance suite: one PASS/FAIL line per criterion on the Example-1
// fixture. Exit status is nonzero if any criterion fails.
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <random>
#include <string>

#include <fmt/format.h>

#include "adle/config.hpp"
#include "adle/stats.hpp"

using namespace adle;

namespace {

constexpr std::uint64_t kMasterSeed = 20240601;

int failures = 0;

void report_line(int id, const std::string& title, bool passed, const std::string& detail) {
  std::cout << fmt::format("criterion {} [{}] {}: {}", id, passed ? "PASS" : "FAIL", title, detail) << std::endl;
  if (!passed) ++failures;
}

Problem fixture(LinkLaw law) {
  return make_problem(example1_model(), TopologyModel(Graph::example1(), law), WeightSchedule{},
                      ProblemOptions{.require_efficiency = true, .cap_consensus_weight = true});
}

const AcceptanceCheck& check(const ExperimentReport& report, const std::string& name) {
  for (const auto& c : report.checks) {
    if (c.name == name) return c;
  }
  throw std::logic_error("missing check " + name);
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Sampling-noise reference for criterion 1: the same gap statistic for a
// covariance estimated from `trials` exact draws of N(0, target).
std::pair<double, double> direct_sampling_gap(const Matrix& target, std::size_t trials, int repeats) {
  const Eigen::LLT<Matrix> llt(target);
  Rng rng(kMasterSeed);
  std::normal_distribution<double> normal;
  std::vector<double> gaps;
  for (int r = 0; r < repeats; ++r) {
    std::vector<Vector> draws;
    for (std::size_t k = 0; k < trials; ++k) {
      Vector z(target.rows());
      for (auto& v : z) v = normal(rng);
      draws.push_back(llt.matrixL() * z);
    }
    gaps.push_back(stats::relative_frobenius_gap(stats::sample_covariance(draws), target));
  }
  std::sort(gaps.begin(), gaps.end());
  return {gaps[gaps.size() / 2], gaps[gaps.size() * 95 / 100]};
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

bool same_csv_outputs(const std::filesystem::path& a, const std::filesystem::path& b) {
  std::size_t compared = 0;
  for (const auto& entry : std::filesystem::directory_iterator(a)) {
    if (entry.path().extension() != ".csv") continue;
    const auto other = b / entry.path().filename();
    if (!std::filesystem::exists(other) || read_file(entry.path()) != read_file(other)) return false;
    ++compared;
  }
  return compared > 0;
}

void criterion_efficiency(const Problem& problem) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentSettings s;
  s.horizon = 50'000;
  s.num_trials = 500;
  s.master_seed = kMasterSeed;
  const auto report = run_experiment(problem, s);
  const auto [median_gap, p95_gap] = direct_sampling_gap(problem.summary.asymptotic_cov, s.num_trials, 400);
  const auto& c = check(report, "efficiency_gap");
  std::string per_agent;
  for (double g : report.rel_frobenius_gap) per_agent += fmt::format(" {:.3f}", g);
  report_line(1, "asymptotic efficiency", c.passed,
              fmt::format("max gap {:.4f} <= 0.20 (agents:{}); centralized baseline gap {:.4f}; "
                          "direct-sampling oracle median {:.4f}, 95th pct {:.4f}; {:.0f} s",
                          c.value, per_agent, report.centralized_gap, median_gap, p95_gap, seconds_since(start)));
}

ExperimentReport consistency_run(const Problem& problem, unsigned threads) {
  ExperimentSettings s;
  s.horizon = 100'000;
  s.num_trials = 100;
  s.master_seed = kMasterSeed;
  s.threads = threads;
  return run_experiment(problem, s);
}

void criteria_rates(const Problem& problem, const ExperimentReport& report) {
  std::string slopes;
  for (double v : report.error_slopes) slopes += fmt::format(" {:.3f}", v);
  const auto& lo = check(report, "error_slope_min");
  report_line(2, "consistency and decay rate", lo.passed,
              fmt::format("median-error slopes over the last decade:{} within [-0.6, -0.4]", slopes));

  const auto& slope = check(report, "disagreement_slope");
  const auto& ratio = check(report, "final_disagreement_ratio");
  report_line(3, "agreement rate", slope.passed && ratio.passed,
              fmt::format("disagreement slope {:.3f} <= -0.3 (tau0 bound {:.3f}); final disagreement/error {:.4f} < 0.1",
                          slope.value, problem.schedule.agreement_exponent_bound(), ratio.value));

  const auto& gain = check(report, "gain_pass_fraction");
  double max_gain = 0.0;
  for (const auto& k : problem.summary.optimal_gains) max_gain = std::max(max_gain, k.norm());
  report_line(4, "gain learning", gain.passed,
              fmt::format("{:.0f}% of trials with max_n ||K_n(T) - K_n|| <= {:.4f} (needs >= 95%)",
                          100.0 * gain.value, 0.05 * max_gain));
}

void criterion_grammian(const Problem& problem) {
  AdleEngine engine(problem);
  auto net = initial_state(problem.model);
  Rng rng(trial_seed(kMasterSeed, 0));
  const std::uint64_t horizon = 10'000;
  double worst_identity = 0.0;
  for (std::uint64_t t = 0; t < horizon; ++t) {
    const Matrix before = average_grammian(net);
    engine.step(net, rng);
    Matrix d_avg = Matrix::Zero(before.rows(), before.cols());
    for (const auto& d : engine.innovation_grammians()) d_avg += d;
    d_avg /= static_cast<double>(net.agents.size());
    const double alpha = problem.schedule.alpha(t);
    const Matrix predicted = (1.0 - alpha) * before + alpha * d_avg;
    worst_identity = std::max(worst_identity, (average_grammian(net) - predicted).cwiseAbs().maxCoeff());
  }
  const double gap = (average_grammian(net) - problem.summary.grammian_norm).norm();
  report_line(5, "Grammian dynamics", worst_identity <= 1e-12 && gap < 0.05,
              fmt::format("max identity residual {:.3g} <= 1e-12; ||G_avg(T) - normalized Grammian|| = {:.4f} < 0.05",
                          worst_identity, gap));
}

void criterion_gossip(const Problem& problem) {
  const auto start = std::chrono::steady_clock::now();
  // Every Laplacian drawn along a full-length trajectory must be disconnected.
  AdleEngine engine(problem);
  auto net = initial_state(problem.model);
  Rng rng(trial_seed(kMasterSeed, 0));
  std::uint64_t connected = 0;
  for (std::uint64_t t = 0; t < 100'000; ++t) {
    engine.step(net, rng);
    if (fiedler_value(Laplacian(problem.model.num_agents(), engine.active_edges())) > 1e-10) ++connected;
  }

  ExperimentSettings s;
  s.horizon = 100'000;
  s.num_trials = 500;
  s.master_seed = kMasterSeed;
  s.thresholds.efficiency_gap = 0.25;
  const auto report = run_experiment(problem, s);
  const auto& c = check(report, "efficiency_gap");
  report_line(6, "gossip links", connected == 0 && c.passed,
              fmt::format("{} connected instances of 100000 (need 0); mean-graph lambda2 {:.4f}; max gap {:.4f} <= 0.25; "
                          "centralized baseline gap {:.4f}; {:.0f} s",
                          connected, problem.mean_lambda2, c.value, report.centralized_gap, seconds_since(start)));
}

void criterion_oracle() {
  struct Case {
    double d1, d2;
  };
  bool ok = true;
  std::string detail;
  for (const auto& [d1, d2] : {Case{0.0, 1.0}, Case{0.2, 0.8}}) {
    const auto start = std::chrono::steady_clock::now();
    const auto trace = deterministic_recursion_oracle(d1, d2, 0.5, 1.0, 1'000'000);
    const double secs = seconds_since(start);
    const bool pass = -trace.slope >= 0.9 * (d2 - d1) && secs < 1.0;
    ok = ok && pass;
    detail += fmt::format("({}, {}): decay {:.3f} >= {:.3f} in {:.2f} s; ", d1, d2, -trace.slope, 0.9 * (d2 - d1), secs);
  }
  const auto start = std::chrono::steady_clock::now();
  const auto trace = deterministic_recursion_oracle(0.5, 0.5, 0.5, 1.0, 1'000'000);
  const double secs = seconds_since(start);
  const bool bounded = trace.late_max_min_ratio < 10.0 && std::isfinite(trace.max_value) && secs < 1.0;
  detail += fmt::format("(0.5, 0.5): late max/min {:.3f} < 10 in {:.2f} s", trace.late_max_min_ratio, secs);
  report_line(7, "recursion oracle", ok && bounded, detail);
}

void criterion_determinism(const Problem& problem, const ExperimentReport& first) {
  const auto root = std::filesystem::temp_directory_path() / "adle-acceptance";
  std::filesystem::remove_all(root);
  write_report(first, problem, root / "first", "acceptance");
  // Rerun on a different worker count; trial order, not scheduling, fixes the output.
  const auto second = consistency_run(problem, 2);
  write_report(second, problem, root / "second", "acceptance");
  const bool same = same_csv_outputs(root / "first", root / "second");
  report_line(8, "determinism", same,
              fmt::format("criterion 2-4 run repeated with seed {}: CSV outputs {}", kMasterSeed,
                          same ? "byte-identical" : "differ"));
  std::filesystem::remove_all(root);
}

}  // namespace

int main() {
  try {
    const auto bernoulli = fixture(BernoulliLinks{0.5});
    const auto gossip = fixture(GossipLinks{});
    std::cout << fmt::format("fixture: N = 5, mean lambda2 {:.6f}, b = {:.4f}, schedule slack {:.3f}\n",
                             bernoulli.mean_lambda2, bernoulli.schedule.b, bernoulli.schedule.timescale_slack());
    criterion_oracle();
    criterion_grammian(bernoulli);
    criterion_efficiency(bernoulli);
    const auto rates = consistency_run(bernoulli, 1);
    criteria_rates(bernoulli, rates);
    criterion_determinism(bernoulli, rates);
    criterion_gossip(gossip);
  } catch (const std::exception& e) {
    std::cout << "acceptance run aborted: " << e.what() << std::endl;
    return 1;
  }
  std::cout << (failures == 0 ? "all criteria passed" : fmt::format("{} criteria failed", failures)) << std::endl;
  return failures == 0 ? 0 : 1;
}
