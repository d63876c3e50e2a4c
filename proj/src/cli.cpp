#include <cstdlib>
#include <fstream>
#include <ostream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "adle/config.hpp"
#include "adle/error.hpp"

namespace adle {

namespace {

std::string number(double v) { return fmt::format("{:.17g}", v); }

void write_matrix_csv(const Matrix& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
  for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << "c" << j;
  out << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << number(m(i, j));
    out << '\n';
  }
}

void print_matrix(std::ostream& out, const Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out << "  ";
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << fmt::format("{:>12.6f}", m(i, j));
    out << '\n';
  }
}

}  // namespace

void write_report(const ExperimentReport& report, const Problem& problem, const std::filesystem::path& dir,
                  std::string_view seed_source) {
  std::filesystem::create_directories(dir);
  const auto num_agents = problem.model.num_agents();
  {
    std::ofstream out(dir / "checkpoints.csv");
    if (!out) throw Error(fmt::format("cannot write into '{}'", dir.string()));
    out << "trial,t,disagreement";
    for (std::size_t n = 0; n < num_agents; ++n) out << ",err_agent_" << n;
    out << ",gain_gap,grammian_gap\n";
    for (std::size_t k = 0; k < report.trials.size(); ++k) {
      for (const auto& c : report.trials[k].checkpoints) {
        out << k << ',' << c.t << ',' << number(c.disagreement);
        for (double e : c.errors) out << ',' << number(e);
        out << ',' << number(c.gain_gap) << ',' << number(c.grammian_gap) << '\n';
      }
    }
  }
  for (std::size_t n = 0; n < num_agents; ++n) {
    write_matrix_csv(report.empirical_scaled_cov[n], dir / fmt::format("cov_agent_{}.csv", n));
  }
  write_matrix_csv(report.target_cov, dir / "target_cov.csv");
  write_matrix_csv(report.centralized_cov, dir / "centralized_cov.csv");

  std::ofstream out(dir / "summary.txt");
  out << "schema = adle-report/1\n";
  out << "master_seed = " << report.master_seed << '\n';
  out << "seed_source = " << seed_source << '\n';
  out << "num_trials = " << report.num_trials << '\n';
  out << "horizon = " << report.horizon << '\n';
  out << "mean_lambda2 = " << number(problem.mean_lambda2) << '\n';
  out << "timescale_slack = " << number(problem.schedule.timescale_slack()) << '\n';
  out << "consensus_weight_b = " << number(problem.schedule.b) << '\n';
  for (std::size_t n = 0; n < num_agents; ++n) {
    out << "rel_frobenius_gap_agent_" << n << " = " << number(report.rel_frobenius_gap[n]) << '\n';
  }
  out << "centralized_gap = " << number(report.centralized_gap) << '\n';
  for (std::size_t n = 0; n < num_agents; ++n) {
    out << "error_slope_agent_" << n << " = " << number(report.error_slopes[n]) << '\n';
  }
  out << "disagreement_slope = " << number(report.disagreement_slope) << '\n';
  for (std::size_t n = 0; n < report.ks_min_pvalue.size(); ++n) {
    out << "ks_min_pvalue_agent_" << n << " = " << number(report.ks_min_pvalue[n]) << '\n';
  }
  for (const auto& c : report.checks) {
    out << "check " << c.name << " = " << number(c.value) << " [" << c.requirement << "] "
        << (c.passed ? "PASS" : "FAIL") << '\n';
  }
  out << "overall = " << (report.all_passed() ? "PASS" : "FAIL") << '\n';
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Adaptive distributed linear estimation: Monte Carlo experiments", "adle"};
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> trials;
  std::optional<std::uint64_t> horizon;
  std::optional<unsigned> threads;
  std::string out_dir;
  bool validate_only = false;
  app.add_option("--config", config_path, "Scenario file (JSON)")->required();
  app.add_option("--seed", seed, "Master seed (overrides the config)");
  app.add_option("--trials", trials, "Number of Monte Carlo trials");
  app.add_option("--horizon", horizon, "Steps per trial");
  app.add_option("--threads", threads, "Worker threads");
  app.add_option("--out", out_dir, "Output directory (falls back to $ADLE_OUT_DIR)");
  app.add_flag("--validate-only", validate_only, "Validate the scenario, print its summary and exit");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    auto config = parse_config(config_path);
    const Problem& problem = *config.problem;
    std::string seed_source = "config";
    if (seed) {
      config.experiment.master_seed = *seed;
      seed_source = "command line";
    }
    if (trials) config.experiment.num_trials = *trials;
    if (horizon) config.experiment.horizon = *horizon;
    if (threads) config.experiment.threads = *threads;

    if (validate_only) {
      out << fmt::format("lambda2(mean Laplacian) = {:.6f}\n", problem.mean_lambda2);
      out << fmt::format("schedule slack tau1 - (tau2 + 1/(2+eps1) + 1/2) = {:.6f}\n",
                         problem.schedule.timescale_slack());
      out << fmt::format("agreement exponent bound tau1 - tau2 - 1/(2+eps1) = {:.6f}\n",
                         problem.schedule.agreement_exponent_bound());
      out << "asymptotic covariance (inverse centralized Grammian):\n";
      print_matrix(out, problem.summary.asymptotic_cov);
      return 0;
    }

    std::filesystem::path dir = config.output_dir;
    if (!out_dir.empty()) {
      dir = out_dir;
    } else if (const char* env = std::getenv("ADLE_OUT_DIR"); env != nullptr && *env != '\0') {
      dir = env;
    }
    const auto report = run_experiment(problem, config.experiment);
    write_report(report, problem, dir, seed_source);
    for (const auto& c : report.checks) {
      out << fmt::format("{:<26} {:>14.6g}  {:<48} {}\n", c.name, c.value, c.requirement,
                         c.passed ? "PASS" : "FAIL");
    }
    out << "report written to " << dir.string() << '\n';
    return report.all_passed() ? 0 : 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace adle
