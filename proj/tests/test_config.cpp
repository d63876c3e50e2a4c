#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "adle/config.hpp"
#include "adle/error.hpp"

using namespace adle;

namespace {

std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("adle-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::filesystem::path write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream(path) << text;
  return path;
}

const char* kSmallScenario = R"({
  "schema": "adle-scenario/1",
  "model": {
    "sensing": [[[1.0, 0.0], [0.0, 1.0]]],
    "noise_cov": [[[1.0, 0.0], [0.0, 1.0]]],
    "true_param": [0.5, -2.0]
  },
  "topology": { "num_nodes": 1, "edges": [], "link_law": { "type": "static" } },
  "experiment": { "horizon": 500, "num_trials": 4, "master_seed": 3 }
})";

}  // namespace

TEST_CASE("example1 preset expands") {
  const auto cfg = parse_config_text(R"({
    "schema": "adle-scenario/1",
    "model": { "preset": "example1" },
    "topology": { "preset": "example1", "link_law": { "type": "bernoulli", "p": 0.5 } },
    "schedule": { "cap_consensus_weight": true }
  })");
  REQUIRE(cfg.problem.has_value());
  CHECK(cfg.model_preset == "example1");
  CHECK(cfg.problem->model.num_agents() == 5);
  CHECK(cfg.problem->topology.base().edges().size() == 6);
  CHECK(cfg.problem->mean_lambda2 == doctest::Approx(0.690983).epsilon(1e-5));
  CHECK(cfg.problem->schedule.b == doctest::Approx(1.0 / 3.0));
  CHECK(cfg.output_dir == "adle-out");
}

TEST_CASE("shipped scenarios parse") {
  for (const char* name : {"example1.json", "example1_gossip.json", "single_agent.json"}) {
    INFO(name);
    CHECK_NOTHROW(parse_config(std::filesystem::path(ADLE_SOURCE_DIR) / "configs" / name));
  }
}

TEST_CASE("schedule violation is reported with its slack") {
  try {
    parse_config_text(R"({
      "schema": "adle-scenario/1",
      "model": { "preset": "example1" },
      "topology": { "preset": "example1", "link_law": { "type": "static" } },
      "schedule": { "tau2": 0.6, "eps1": 2.0 }
    })");
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    REQUIRE(e.problems().size() == 1);
    CHECK(e.problems()[0].find("tau1 > tau2 + 1/(2+eps1) + 1/2") != std::string::npos);
    CHECK(e.problems()[0].find("-0.35") != std::string::npos);
  }
}

TEST_CASE("parse errors") {
  CHECK_THROWS_AS(parse_config("/nonexistent/scenario.json"), ParseError);
  try {
    parse_config_text("{\n  \"schema\": \"adle-scenario/1\",\n  \"model\": [\n}");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 4);
  }
  try {
    parse_config_text(R"({"schema": "adle-scenario/1", "model": {"preset": "example1", "bogus": 1},
                          "topology": {"preset": "example1", "link_law": {"type": "static"}}})");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.field() == "model.bogus");
  }
  CHECK_THROWS_AS(parse_config_text(R"({"schema": "other/2"})"), ParseError);
}

TEST_CASE("validation collects every problem") {
  try {
    parse_config_text(R"({
      "schema": "adle-scenario/1",
      "model": { "preset": "example1" },
      "topology": { "num_nodes": 5, "edges": [[0, 1], [2, 3]], "link_law": { "type": "static" } },
      "experiment": { "num_trials": 1, "horizon": 5, "checkpoint_start": 10 }
    })");
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.problems().size() >= 3);
  }
}

TEST_CASE("cli exit codes and outputs") {
  const auto dir = scratch_dir("cli");
  const auto cfg = write_file(dir / "small.json", kSmallScenario);
  std::ostringstream out, err;

  CHECK(run_cli({"--config", cfg.string(), "--validate-only"}, out, err) == 0);
  CHECK(out.str().find("asymptotic covariance") != std::string::npos);

  CHECK(run_cli({"--bogus"}, out, err) == 1);
  CHECK(run_cli({"--config", (dir / "missing.json").string()}, out, err) == 1);
  CHECK(run_cli({"--help"}, out, err) == 0);

  const auto run_dir = dir / "run";
  const int code = run_cli({"--config", cfg.string(), "--out", run_dir.string(), "--seed", "11"}, out, err);
  CHECK((code == 0 || code == 2));
  for (const char* f : {"checkpoints.csv", "cov_agent_0.csv", "target_cov.csv", "centralized_cov.csv", "summary.txt"}) {
    CHECK(std::filesystem::exists(run_dir / f));
  }
  std::ifstream summary(run_dir / "summary.txt");
  const std::string text((std::istreambuf_iterator<char>(summary)), {});
  CHECK(text.find("master_seed = 11") != std::string::npos);
  CHECK(text.find("seed_source = command line") != std::string::npos);

  std::ifstream csv(run_dir / "checkpoints.csv");
  std::string header;
  std::getline(csv, header);
  CHECK(header == "trial,t,disagreement,err_agent_0,gain_gap,grammian_gap");
}

TEST_CASE("output directory falls back to the environment") {
  const auto dir = scratch_dir("env");
  const auto cfg = write_file(dir / "small.json", kSmallScenario);
  const auto env_dir = dir / "from-env";
  ::setenv("ADLE_OUT_DIR", env_dir.c_str(), 1);
  std::ostringstream out, err;
  run_cli({"--config", cfg.string()}, out, err);
  ::unsetenv("ADLE_OUT_DIR");
  CHECK(std::filesystem::exists(env_dir / "summary.txt"));
}
