#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "adle/adle.hpp"
#include "adle/harness.hpp"

namespace adle {

inline constexpr std::string_view kScenarioSchema = "adle-scenario/1";

/// A scenario file after parsing and validation. `problem` is ready to run.
struct ScenarioConfig {
  std::string model_preset;     // empty when matrices were given explicitly
  std::string topology_preset;  // likewise for the edge list
  ProblemOptions options;
  std::optional<Problem> problem;
  ExperimentSettings experiment;
  std::string output_dir;
};

/// Reads a JSON scenario file (see README for the schema). Throws ParseError
/// for unreadable files, malformed JSON (with line number) or badly shaped
/// fields (with the field path); throws ValidationError listing every
/// model, topology and schedule failure.
ScenarioConfig parse_config(const std::filesystem::path& path);
ScenarioConfig parse_config_text(std::string_view text);

/// Writes checkpoints.csv, cov_agent_<n>.csv, target_cov.csv,
/// centralized_cov.csv and summary.txt into `dir` (created if missing).
void write_report(const ExperimentReport& report, const Problem& problem, const std::filesystem::path& dir,
                  std::string_view seed_source);

/// Command-line entry point. Returns 0 when every acceptance statistic
/// passes, 2 when the run completed but some statistic failed, 1 on any
/// configuration or runtime error (including bad flags).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace adle
