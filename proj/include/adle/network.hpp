#pragma once

#include <cstddef>
#include <utility>
#include <variant>
#include <vector>

#include "adle/model.hpp"

namespace adle {

/// Undirected edge, stored with first < second.
struct Edge {
  std::size_t first;
  std::size_t second;

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Simple undirected graph on nodes [0, N). Construction rejects self-loops,
/// duplicate edges and out-of-range endpoints.
class Graph {
 public:
  Graph() = default;
  Graph(std::size_t num_nodes, std::vector<std::pair<std::size_t, std::size_t>> edges);

  std::size_t num_nodes() const { return num_nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  std::vector<std::size_t> degrees() const;
  std::size_t max_degree() const;

  static Graph complete(std::size_t num_nodes);
  static Graph path(std::size_t num_nodes);
  static Graph cycle(std::size_t num_nodes);
  /// Five-node cycle 0-1-2-3-4-0 plus the chord 0-2.
  static Graph example1();

 private:
  std::size_t num_nodes_ = 0;
  std::vector<Edge> edges_;
};

/// Laplacian L = D - A of a simple graph. Kept in edge-list form, since the
/// estimator only needs neighbor differences; `dense()` materializes it.
class Laplacian {
 public:
  Laplacian() = default;
  Laplacian(std::size_t num_nodes, std::vector<Edge> active_edges)
      : num_nodes_(num_nodes), edges_(std::move(active_edges)) {}

  std::size_t num_nodes() const { return num_nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  Matrix dense() const;

 private:
  std::size_t num_nodes_ = 0;
  std::vector<Edge> edges_;
};

Laplacian laplacian_of(const Graph& graph);

/// Second-smallest eigenvalue of a symmetric Laplacian-like matrix. Returns 0
/// for a single node.
double fiedler_value(const Matrix& laplacian);
double fiedler_value(const Laplacian& laplacian);

struct StaticLinks {};
/// Each base edge is active independently with probability p.
struct BernoulliLinks {
  double p = 1.0;
};
/// Exactly one base edge, chosen uniformly, is active per step.
struct GossipLinks {};

using LinkLaw = std::variant<StaticLinks, BernoulliLinks, GossipLinks>;

class TopologyModel {
 public:
  TopologyModel(Graph base, LinkLaw law);

  const Graph& base() const { return base_; }
  const LinkLaw& law() const { return law_; }
  std::size_t num_nodes() const { return base_.num_nodes(); }

  /// One i.i.d. draw L_t. Static law consumes no randomness.
  Laplacian sample(Rng& rng) const;
  /// Same as `sample` but reuses the caller's edge buffer.
  void sample_into(Rng& rng, std::vector<Edge>& active) const;

 private:
  Graph base_;
  LinkLaw law_;
};

Laplacian sample_laplacian(const TopologyModel& topology, Rng& rng);

/// Exact expectation of the sampled Laplacian.
Matrix mean_laplacian(const TopologyModel& topology);

/// Returns lambda2 of the mean Laplacian, throwing NotMeanConnected when it
/// is not above 1e-10.
double validate_mean_connectivity(const TopologyModel& topology);

}  // namespace adle
