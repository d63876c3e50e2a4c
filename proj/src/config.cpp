#include "adle/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "adle/error.hpp"

namespace adle {

namespace {

using nlohmann::json;

std::size_t line_of(std::string_view text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

// Walks a JSON object, remembering the dotted path for error messages and
// rejecting keys nobody asked for.
class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ParseError("expected an object", 0, path_);
  }

  bool has(const std::string& key) const { return node_.contains(key); }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    if (!node_.contains(key)) throw ParseError("missing required field", 0, field(key));
    return node_.at(key);
  }

  Section child(const std::string& key) { return Section(raw(key), field(key)); }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return seen(key), fallback;
    const auto& v = raw(key);
    if (!v.is_number()) throw ParseError("expected a number", 0, field(key));
    return v.get<double>();
  }

  std::uint64_t count(const std::string& key, std::uint64_t fallback) {
    if (!has(key)) return seen(key), fallback;
    const auto& v = raw(key);
    if (!v.is_number_unsigned()) throw ParseError("expected a non-negative integer", 0, field(key));
    return v.get<std::uint64_t>();
  }

  bool flag(const std::string& key, bool fallback) {
    if (!has(key)) return seen(key), fallback;
    const auto& v = raw(key);
    if (!v.is_boolean()) throw ParseError("expected true or false", 0, field(key));
    return v.get<bool>();
  }

  std::string text(const std::string& key, std::string fallback) {
    if (!has(key)) return seen(key), fallback;
    const auto& v = raw(key);
    if (!v.is_string()) throw ParseError("expected a string", 0, field(key));
    return v.get<std::string>();
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void reject_unknown() const {
    for (const auto& [key, _] : node_.items()) {
      if (!seen_.contains(key)) throw ParseError("unknown field", 0, field(key));
    }
  }

 private:
  void seen(const std::string& key) { seen_.insert(key); }

  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

Vector to_vector(const json& node, const std::string& path) {
  if (!node.is_array() || node.empty()) throw ParseError("expected a non-empty numeric array", 0, path);
  Vector v(static_cast<Eigen::Index>(node.size()));
  for (std::size_t i = 0; i < node.size(); ++i) {
    if (!node[i].is_number()) throw ParseError("expected a number", 0, fmt::format("{}[{}]", path, i));
    v(static_cast<Eigen::Index>(i)) = node[i].get<double>();
  }
  return v;
}

Matrix to_matrix(const json& node, const std::string& path) {
  if (!node.is_array() || node.empty()) throw ParseError("expected a non-empty array of rows", 0, path);
  std::vector<Vector> rows;
  for (std::size_t i = 0; i < node.size(); ++i) rows.push_back(to_vector(node[i], fmt::format("{}[{}]", path, i)));
  const auto cols = rows.front().size();
  Matrix m(static_cast<Eigen::Index>(rows.size()), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) throw ParseError("ragged matrix rows", 0, fmt::format("{}[{}]", path, i));
    m.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  }
  return m;
}

std::vector<Matrix> to_matrix_list(const json& node, const std::string& path) {
  if (!node.is_array() || node.empty()) throw ParseError("expected a non-empty array of matrices", 0, path);
  std::vector<Matrix> out;
  for (std::size_t i = 0; i < node.size(); ++i) out.push_back(to_matrix(node[i], fmt::format("{}[{}]", path, i)));
  return out;
}

ObservationModel read_model(Section section, std::string& preset) {
  ObservationModel model;
  preset = section.text("preset", "");
  const auto noise = section.text("noise", "gaussian");
  if (noise == "gaussian") {
    model.noise = NoiseKind::Gaussian;
  } else if (noise == "laplace") {
    model.noise = NoiseKind::Laplace;
  } else {
    throw ParseError(fmt::format("unknown noise '{}' (gaussian or laplace)", noise), 0, section.field("noise"));
  }
  std::optional<Vector> theta;
  if (section.has("true_param")) theta = to_vector(section.raw("true_param"), section.field("true_param"));

  if (!preset.empty()) {
    if (preset != "example1") throw ParseError(fmt::format("unknown model preset '{}'", preset), 0, section.field("preset"));
    if (section.has("sensing") || section.has("noise_cov")) {
      throw ParseError("a preset cannot be combined with explicit matrices", 0, section.field("preset"));
    }
    const auto noise_kind = model.noise;
    try {
      model = theta ? example1_model(*theta) : example1_model();
    } catch (const DimensionMismatch& e) {
      throw ParseError(e.what(), 0, section.field("true_param"));
    }
    model.noise = noise_kind;
  } else {
    model.sensing = to_matrix_list(section.raw("sensing"), section.field("sensing"));
    model.noise_cov = to_matrix_list(section.raw("noise_cov"), section.field("noise_cov"));
    if (!theta) throw ParseError("missing required field", 0, section.field("true_param"));
    model.true_param = *theta;
  }
  section.reject_unknown();
  return model;
}

struct TopologySpec {
  std::size_t num_nodes = 0;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  bool preset_graph = false;
  Graph preset;
  LinkLaw law;
};

TopologySpec read_topology(Section section, std::string& preset) {
  TopologySpec spec;
  preset = section.text("preset", "");
  if (!preset.empty()) {
    if (preset == "example1") {
      spec.preset = Graph::example1();
    } else if (preset == "pentagon") {
      spec.preset = Graph::cycle(5);
    } else {
      throw ParseError(fmt::format("unknown topology preset '{}' (example1 or pentagon)", preset), 0,
                       section.field("preset"));
    }
    spec.preset_graph = true;
  } else {
    spec.num_nodes = section.count("num_nodes", 0);
    const auto& edges = section.raw("edges");
    if (!edges.is_array()) throw ParseError("expected an array of [n, l] pairs", 0, section.field("edges"));
    for (std::size_t i = 0; i < edges.size(); ++i) {
      const auto& e = edges[i];
      if (!e.is_array() || e.size() != 2 || !e[0].is_number_unsigned() || !e[1].is_number_unsigned()) {
        throw ParseError("expected a pair of node indices", 0, fmt::format("{}[{}]", section.field("edges"), i));
      }
      spec.edges.emplace_back(e[0].get<std::size_t>(), e[1].get<std::size_t>());
    }
  }
  if (section.has("link_law")) {
    auto law = section.child("link_law");
    const auto type = law.text("type", "");
    if (type == "static") {
      spec.law = StaticLinks{};
    } else if (type == "bernoulli") {
      spec.law = BernoulliLinks{law.number("p", 1.0)};
    } else if (type == "gossip") {
      spec.law = GossipLinks{};
    } else {
      throw ParseError(fmt::format("unknown link law '{}' (static, bernoulli or gossip)", type), 0,
                       law.field("type"));
    }
    law.reject_unknown();
  } else {
    spec.law = StaticLinks{};
  }
  section.reject_unknown();
  return spec;
}

WeightSchedule read_schedule(Section section, ProblemOptions& options) {
  WeightSchedule s;
  s.a = section.number("a", s.a);
  s.b = section.number("b", s.b);
  s.tau1 = section.number("tau1", s.tau1);
  s.tau2 = section.number("tau2", s.tau2);
  s.gamma0 = section.number("gamma0", s.gamma0);
  s.tau_gamma = section.number("tau_gamma", s.tau_gamma);
  s.eps1 = section.number("eps1", s.eps1);
  options.require_efficiency = section.flag("require_efficiency", options.require_efficiency);
  options.cap_consensus_weight = section.flag("cap_consensus_weight", options.cap_consensus_weight);
  section.reject_unknown();
  return s;
}

void read_experiment(Section section, ExperimentSettings& e, std::string& output_dir) {
  e.horizon = section.count("horizon", e.horizon);
  e.num_trials = section.count("num_trials", e.num_trials);
  e.master_seed = section.count("master_seed", e.master_seed);
  e.checkpoint_start = section.count("checkpoint_start", e.checkpoint_start);
  e.checkpoint_ratio = section.number("checkpoint_ratio", e.checkpoint_ratio);
  e.rate_window = section.number("rate_window", e.rate_window);
  e.threads = static_cast<unsigned>(section.count("threads", e.threads));
  e.run_ks_test = section.flag("run_ks_test", e.run_ks_test);
  output_dir = section.text("output_dir", output_dir);
  section.reject_unknown();
}

void read_acceptance(Section section, AcceptanceThresholds& t) {
  t.efficiency_gap = section.number("efficiency_gap", t.efficiency_gap);
  t.error_slope_min = section.number("error_slope_min", t.error_slope_min);
  t.error_slope_max = section.number("error_slope_max", t.error_slope_max);
  t.tau0 = section.number("tau0", t.tau0);
  t.disagreement_ratio = section.number("disagreement_ratio", t.disagreement_ratio);
  t.gain_tolerance = section.number("gain_tolerance", t.gain_tolerance);
  t.gain_pass_fraction = section.number("gain_pass_fraction", t.gain_pass_fraction);
  t.grammian_gap = section.number("grammian_gap", t.grammian_gap);
  section.reject_unknown();
}

}  // namespace

ScenarioConfig parse_config_text(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(e.what(), line_of(text, e.byte), "");
  }
  Section top(root, "");
  const auto schema = top.text("schema", "");
  if (schema != kScenarioSchema) {
    throw ParseError(fmt::format("schema must be \"{}\", got \"{}\"", kScenarioSchema, schema), 0, "schema");
  }

  ScenarioConfig config;
  config.output_dir = "adle-out";
  auto model = read_model(top.child("model"), config.model_preset);
  auto topology = read_topology(top.child("topology"), config.topology_preset);
  WeightSchedule schedule = top.has("schedule") ? read_schedule(top.child("schedule"), config.options)
                                                : WeightSchedule{};
  if (top.has("experiment")) read_experiment(top.child("experiment"), config.experiment, config.output_dir);
  if (top.has("acceptance")) read_acceptance(top.child("acceptance"), config.experiment.thresholds);
  top.reject_unknown();

  // Semantic validation: collect every failure rather than stopping early.
  std::vector<std::string> problems;
  std::optional<TopologyModel> top_model;
  try {
    Graph graph = topology.preset_graph ? topology.preset : Graph(topology.num_nodes, topology.edges);
    top_model.emplace(std::move(graph), topology.law);
    if (top_model->num_nodes() > 1) validate_mean_connectivity(*top_model);
  } catch (const Error& e) {
    problems.push_back(fmt::format("topology: {}", e.what()));
  }
  try {
    validate_observation_model(model);
    if (top_model && top_model->num_nodes() != model.num_agents()) {
      problems.push_back(fmt::format("topology has {} nodes but the model has {} agents", top_model->num_nodes(),
                                     model.num_agents()));
    }
  } catch (const Error& e) {
    problems.push_back(fmt::format("model: {}", e.what()));
  }
  try {
    WeightSchedule check = schedule;
    if (config.options.cap_consensus_weight && top_model && top_model->base().max_degree() > 0) {
      check.b = std::min(check.b, 1.0 / static_cast<double>(top_model->base().max_degree()));
    }
    validate_schedule(check, config.options.require_efficiency);
  } catch (const ScheduleViolation& e) {
    for (const auto& issue : e.issues()) {
      problems.push_back(fmt::format("schedule: {} violated (slack {:.6g})", issue.constraint, issue.slack));
    }
  }
  if (config.experiment.num_trials < 2) problems.push_back("experiment: num_trials must be at least 2");
  if (config.experiment.horizon < config.experiment.checkpoint_start) {
    problems.push_back(fmt::format("experiment: horizon {} is before the first checkpoint {}",
                                   config.experiment.horizon, config.experiment.checkpoint_start));
  }
  if (!problems.empty()) throw ValidationError(std::move(problems));

  config.problem.emplace(make_problem(std::move(model), std::move(*top_model), schedule, config.options));
  return config;
}

ScenarioConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(fmt::format("cannot read config file '{}'", path.string()), 0, "");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

}  // namespace adle
