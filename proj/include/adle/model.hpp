#pragma once

#include <cstddef>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace adle {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Rng = std::mt19937_64;

enum class NoiseKind { Gaussian, Laplace };

/// Static linear sensing problem: agent n observes H_n * theta + noise with
/// covariance R_n. Matrices are stored per agent; H_n is M_n x M.
struct ObservationModel {
  std::vector<Matrix> sensing;
  std::vector<Matrix> noise_cov;
  Vector true_param;
  NoiseKind noise = NoiseKind::Gaussian;

  std::size_t num_agents() const { return sensing.size(); }
  Eigen::Index param_dim() const { return true_param.size(); }
  Eigen::Index obs_dim(std::size_t agent) const { return sensing.at(agent).rows(); }
};

/// Centralized quantities the distributed estimator is measured against.
struct CentralizedSummary {
  Matrix grammian_norm;   // (1/N) sum H_n^T R_n^-1 H_n
  Matrix grammian;        // N * grammian_norm
  Matrix asymptotic_cov;  // grammian^-1
  std::vector<Matrix> optimal_gains;  // grammian_norm^-1 H_n^T R_n^-1
};

/// Checks dimensions, positive definiteness of every R_n and global
/// observability, then returns the centralized summary.
///
/// Throws DimensionMismatch, NotPositiveDefinite or NotGloballyObservable.
/// Observability is rejected when the smallest eigenvalue of the normalized
/// Grammian falls below 1e-12 times the largest.
CentralizedSummary validate_observation_model(const ObservationModel& model);

/// N = 5 agents on a cyclic superposition model: agent n senses
/// theta_{n-1} + theta_n + theta_{n+1} (indices mod 5) with unit noise.
ObservationModel example1_model(const Vector& true_param = Vector::Ones(5));

/// Draws observations y_n = H_n theta + zeta_n. The noise square roots are
/// factored once at construction; R_n only needs to be positive semidefinite
/// here so degenerate (noiseless) models can be simulated.
class ObservationSampler {
 public:
  explicit ObservationSampler(const ObservationModel& model);

  /// Writes one observation of `agent` into `out` (resized to M_n).
  void sample(std::size_t agent, Rng& rng, Vector& out) const;
  Vector sample(std::size_t agent, Rng& rng) const;

 private:
  NoiseKind noise_;
  std::vector<Matrix> noise_sqrt_;
  std::vector<Vector> mean_;
};

Vector sample_observation(const ObservationModel& model, std::size_t agent, Rng& rng);

/// Batch least-squares estimate from per-agent observation histories:
/// `observations[n][s]` is y_n(s). All agents must supply the same number of
/// samples (t + 1 >= 1).
Vector centralized_estimate(const ObservationModel& model,
                            const CentralizedSummary& summary,
                            const std::vector<std::vector<Vector>>& observations);

/// Running form of centralized_estimate: keeps only per-agent sums.
class CentralizedEstimator {
 public:
  CentralizedEstimator(const ObservationModel& model, const CentralizedSummary& summary);

  void add(std::size_t agent, const Vector& y);
  /// Declares the end of one time slot (one observation per agent).
  void advance() { ++slots_; }
  std::size_t slots() const { return slots_; }
  Vector estimate() const;

 private:
  std::vector<Matrix> weighted_sensing_;  // H_n^T R_n^-1
  Matrix asymptotic_cov_;
  std::vector<Vector> sums_;
  std::size_t slots_ = 0;
};

}  // namespace adle
