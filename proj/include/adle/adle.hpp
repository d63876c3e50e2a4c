#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "adle/model.hpp"
#include "adle/network.hpp"
#include "adle/schedule.hpp"

namespace adle {

/// Local state of one agent.
struct AgentState {
  Vector estimate;       // x_n(t)
  Matrix grammian_est;   // G_n(t), local estimate of the normalized Grammian
  Matrix sample_cov;     // Q_n(t), from observations y_n(0..t-1)
  Vector obs_sum;
  Matrix obs_outer_sum;
  std::uint64_t samples_seen = 0;
};

struct NetworkState {
  std::vector<AgentState> agents;
  std::uint64_t step = 0;
};

/// Zero estimates, zero Grammian and zero covariance for every agent.
NetworkState initial_state(const ObservationModel& model);

/// Fully validated estimation problem shared (read-only) by all trials.
struct Problem {
  ObservationModel model;
  CentralizedSummary summary;
  TopologyModel topology;
  WeightSchedule schedule;
  double mean_lambda2 = 0.0;
};

struct ProblemOptions {
  bool require_efficiency = true;
  /// Lower b so that b * max_degree <= 1, keeping the first consensus step
  /// a convex combination.
  bool cap_consensus_weight = false;
};

/// Runs model, topology and schedule validation; the first failure is thrown.
Problem make_problem(ObservationModel model, TopologyModel topology, WeightSchedule schedule,
                     ProblemOptions options = {});

/// Folds y into the running moments and recomputes
/// Q = (1/k) sum y y^T - mean mean^T over the k samples seen so far.
void update_sample_covariance(AgentState& state, const Vector& y);

/// K_n(t) = (G_n + gamma I)^-1 H_n^T (Q_n + gamma I)^-1.
Matrix compute_gain(const AgentState& state, const Matrix& sensing, double gamma);

/// D_n(t) = H_n^T (Q_n + gamma I)^-1 H_n, the local innovation target of the
/// Grammian recursion (symmetrized).
Matrix innovation_grammian(const Matrix& sensing, const Matrix& sample_cov, double gamma);

/// Synchronous Grammian step for all agents:
///   G_n <- G_n - beta_t sum_{l in nbr(n)} (G_n - G_l) + alpha_t (D_n - G_n)
/// with D_n = innovation_grammian(H_n, Q_n(t), gamma_t).
void update_grammian(NetworkState& net, const Laplacian& lap, const ObservationModel& model,
                     const WeightSchedule& schedule, std::uint64_t t);

/// Synchronous estimate step for all agents:
///   x_n <- x_n - beta_t sum_{l in nbr(n)} (x_n - x_l) + alpha_t K_n (y_n - H_n x_n)
void update_estimates(NetworkState& net, const Laplacian& lap, std::span<const Matrix> gains,
                      std::span<const Vector> observations, const ObservationModel& model,
                      const WeightSchedule& schedule, std::uint64_t t);

struct StepDiagnostics {
  double disagreement = 0.0;         // max_{n,l} ||x_n - x_l||
  std::vector<double> errors;        // ||x_n - theta*||
  double gain_gap = 0.0;             // max_n ||K_n(t) - K_n||_F
  double grammian_gap = 0.0;         // ||G_avg(t) - normalized Grammian||_F
};

/// Per-trial step driver. Owns scratch buffers so a step allocates nothing
/// once warmed up. The problem must outlive the engine.
///
/// One call to `step` advances t -> t+1:
///   1. draw L_t, then y_n(t) for n = 0..N-1 from the same stream;
///   2. from the time-t snapshot, form K_n(t) and D_n(t) using Q_n(t), G_n(t);
///   3. update every G_n and x_n synchronously;
///   4. fold y_n(t) into Q_n, giving Q_n(t+1).
/// K_n(t) therefore never depends on y_n(t).
class AdleEngine {
 public:
  explicit AdleEngine(const Problem& problem);

  void step(NetworkState& net, Rng& rng);
  StepDiagnostics diagnostics(const NetworkState& net) const;

  /// Quantities from the most recent step.
  const std::vector<Edge>& active_edges() const { return edges_; }
  const std::vector<Vector>& observations() const { return observations_; }
  const std::vector<Matrix>& innovation_grammians() const { return innovation_; }

 private:
  const Problem* problem_;
  ObservationSampler sampler_;
  std::vector<Edge> edges_;
  std::vector<Vector> observations_;
  std::vector<Matrix> innovation_;
  std::vector<Vector> correction_;
  std::vector<Vector> consensus_x_;
  std::vector<Matrix> consensus_g_;
  std::vector<Matrix> weighted_sensing_;
  Matrix regularized_;
  Matrix regularized_obs_;
  Matrix solved_obs_;
  Vector residual_;
  Vector direction_;
  Vector mean_;
  Eigen::LLT<Matrix> param_llt_;
  Eigen::LLT<Matrix> obs_llt_;
};

/// Max pairwise Euclidean distance between agent estimates.
double max_disagreement(const NetworkState& net);

/// Network average of the Grammian estimates.
Matrix average_grammian(const NetworkState& net);

}  // namespace adle
