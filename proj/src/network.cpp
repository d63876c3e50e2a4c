#include "adle/network.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "adle/error.hpp"

namespace adle {

namespace {

constexpr double kConnectivityFloor = 1e-10;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void add_edge(Matrix& lap, const Edge& e, double weight) {
  const auto i = static_cast<Eigen::Index>(e.first);
  const auto j = static_cast<Eigen::Index>(e.second);
  lap(i, i) += weight;
  lap(j, j) += weight;
  lap(i, j) -= weight;
  lap(j, i) -= weight;
}

}  // namespace

Graph::Graph(std::size_t num_nodes, std::vector<std::pair<std::size_t, std::size_t>> edges)
    : num_nodes_(num_nodes) {
  edges_.reserve(edges.size());
  for (auto [a, b] : edges) {
    if (a >= num_nodes || b >= num_nodes) {
      throw InvalidGraph(fmt::format("edge ({}, {}) has an endpoint outside [0, {})", a, b, num_nodes));
    }
    if (a == b) throw InvalidGraph(fmt::format("self-loop at node {}", a));
    edges_.push_back(Edge{std::min(a, b), std::max(a, b)});
  }
  std::sort(edges_.begin(), edges_.end());
  if (auto dup = std::adjacent_find(edges_.begin(), edges_.end()); dup != edges_.end()) {
    throw InvalidGraph(fmt::format("duplicate edge ({}, {})", dup->first, dup->second));
  }
}

std::vector<std::size_t> Graph::degrees() const {
  std::vector<std::size_t> deg(num_nodes_, 0);
  for (const auto& e : edges_) {
    ++deg[e.first];
    ++deg[e.second];
  }
  return deg;
}

std::size_t Graph::max_degree() const {
  const auto deg = degrees();
  return deg.empty() ? 0 : *std::max_element(deg.begin(), deg.end());
}

Graph Graph::complete(std::size_t num_nodes) {
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t i = 0; i < num_nodes; ++i) {
    for (std::size_t j = i + 1; j < num_nodes; ++j) edges.emplace_back(i, j);
  }
  return Graph(num_nodes, std::move(edges));
}

Graph Graph::path(std::size_t num_nodes) {
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t i = 0; i + 1 < num_nodes; ++i) edges.emplace_back(i, i + 1);
  return Graph(num_nodes, std::move(edges));
}

Graph Graph::cycle(std::size_t num_nodes) {
  if (num_nodes < 3) throw InvalidGraph("a cycle needs at least 3 nodes");
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t i = 0; i < num_nodes; ++i) edges.emplace_back(i, (i + 1) % num_nodes);
  return Graph(num_nodes, std::move(edges));
}

Graph Graph::example1() {
  return Graph(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0}, {0, 2}});
}

Matrix Laplacian::dense() const {
  const auto n = static_cast<Eigen::Index>(num_nodes_);
  Matrix lap = Matrix::Zero(n, n);
  for (const auto& e : edges_) add_edge(lap, e, 1.0);
  return lap;
}

Laplacian laplacian_of(const Graph& graph) { return Laplacian(graph.num_nodes(), graph.edges()); }

double fiedler_value(const Matrix& laplacian) {
  if (laplacian.rows() < 2) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(laplacian, Eigen::EigenvaluesOnly);
  return std::max(0.0, eig.eigenvalues()(1));
}

double fiedler_value(const Laplacian& laplacian) { return fiedler_value(laplacian.dense()); }

TopologyModel::TopologyModel(Graph base, LinkLaw law) : base_(std::move(base)), law_(law) {
  if (const auto* b = std::get_if<BernoulliLinks>(&law_); b != nullptr && !(b->p > 0.0 && b->p <= 1.0)) {
    throw InvalidGraph(fmt::format("link probability {} outside (0, 1]", b->p));
  }
  if (std::holds_alternative<GossipLinks>(law_) && base_.edges().empty()) {
    throw InvalidGraph("gossip links need a base graph with at least one edge");
  }
}

void TopologyModel::sample_into(Rng& rng, std::vector<Edge>& active) const {
  active.clear();
  const auto& edges = base_.edges();
  std::visit(Overloaded{
                 [&](const StaticLinks&) { active.assign(edges.begin(), edges.end()); },
                 [&](const BernoulliLinks& b) {
                   std::bernoulli_distribution on(b.p);
                   for (const auto& e : edges) {
                     if (on(rng)) active.push_back(e);
                   }
                 },
                 [&](const GossipLinks&) {
                   std::uniform_int_distribution<std::size_t> pick(0, edges.size() - 1);
                   active.push_back(edges[pick(rng)]);
                 },
             },
             law_);
}

Laplacian TopologyModel::sample(Rng& rng) const {
  std::vector<Edge> active;
  sample_into(rng, active);
  return Laplacian(num_nodes(), std::move(active));
}

Laplacian sample_laplacian(const TopologyModel& topology, Rng& rng) { return topology.sample(rng); }

Matrix mean_laplacian(const TopologyModel& topology) {
  const auto n = static_cast<Eigen::Index>(topology.num_nodes());
  const auto& edges = topology.base().edges();
  const double weight = std::visit(Overloaded{
                                       [](const StaticLinks&) { return 1.0; },
                                       [](const BernoulliLinks& b) { return b.p; },
                                       [&](const GossipLinks&) { return 1.0 / static_cast<double>(edges.size()); },
                                   },
                                   topology.law());
  Matrix lap = Matrix::Zero(n, n);
  for (const auto& e : edges) add_edge(lap, e, weight);
  return lap;
}

double validate_mean_connectivity(const TopologyModel& topology) {
  const double lambda2 = fiedler_value(mean_laplacian(topology));
  if (!(lambda2 > kConnectivityFloor)) throw NotMeanConnected(lambda2);
  return lambda2;
}

}  // namespace adle
