#include "adle/model.hpp"

#include <cmath>

#include <fmt/format.h>

#include "adle/error.hpp"

namespace adle {

namespace {

constexpr double kObservabilityRatio = 1e-12;

bool is_symmetric(const Matrix& m) {
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff());
}

void check_dimensions(const ObservationModel& model) {
  if (model.num_agents() == 0) throw DimensionMismatch("observation model has no agents");
  if (model.noise_cov.size() != model.sensing.size()) {
    throw DimensionMismatch(fmt::format("{} sensing matrices but {} noise covariances", model.sensing.size(),
                                        model.noise_cov.size()));
  }
  if (model.param_dim() == 0) throw DimensionMismatch("parameter dimension is zero");
  for (std::size_t n = 0; n < model.num_agents(); ++n) {
    const auto& h = model.sensing[n];
    const auto& r = model.noise_cov[n];
    if (h.rows() == 0 || h.cols() != model.param_dim()) {
      throw DimensionMismatch(fmt::format("agent {}: sensing matrix is {}x{}, expected M_n x {}", n, h.rows(),
                                          h.cols(), model.param_dim()));
    }
    if (r.rows() != h.rows() || r.cols() != h.rows()) {
      throw DimensionMismatch(fmt::format("agent {}: noise covariance is {}x{}, expected {}x{}", n, r.rows(),
                                          r.cols(), h.rows(), h.rows()));
    }
  }
}

// Symmetric square root of a PSD matrix; tiny negative eigenvalues are clipped.
Matrix psd_sqrt(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m);
  Vector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace

CentralizedSummary validate_observation_model(const ObservationModel& model) {
  check_dimensions(model);
  const auto num_agents = model.num_agents();
  const auto dim = model.param_dim();

  CentralizedSummary out;
  out.grammian_norm = Matrix::Zero(dim, dim);
  std::vector<Matrix> weighted(num_agents);
  for (std::size_t n = 0; n < num_agents; ++n) {
    const auto& r = model.noise_cov[n];
    if (!is_symmetric(r)) throw NotPositiveDefinite(n);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(r, Eigen::EigenvaluesOnly);
    if (!(eig.eigenvalues().minCoeff() > 0.0)) throw NotPositiveDefinite(n);
    Eigen::LLT<Matrix> chol(r);
    if (chol.info() != Eigen::Success) throw NotPositiveDefinite(n);
    // H^T R^-1
    weighted[n] = chol.solve(model.sensing[n]).transpose();
    out.grammian_norm += weighted[n] * model.sensing[n];
  }
  out.grammian_norm /= static_cast<double>(num_agents);
  out.grammian_norm = 0.5 * (out.grammian_norm + out.grammian_norm.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Matrix> eig(out.grammian_norm, Eigen::EigenvaluesOnly);
  const double smallest = eig.eigenvalues()(0);
  const double largest = eig.eigenvalues()(dim - 1);
  if (!(largest > 0.0) || smallest < kObservabilityRatio * largest) throw NotGloballyObservable(smallest);

  out.grammian = static_cast<double>(num_agents) * out.grammian_norm;
  Eigen::LLT<Matrix> gram_chol(out.grammian);
  out.asymptotic_cov = gram_chol.solve(Matrix::Identity(dim, dim));
  out.asymptotic_cov = 0.5 * (out.asymptotic_cov + out.asymptotic_cov.transpose()).eval();

  Eigen::LLT<Matrix> norm_chol(out.grammian_norm);
  out.optimal_gains.reserve(num_agents);
  for (std::size_t n = 0; n < num_agents; ++n) out.optimal_gains.push_back(norm_chol.solve(weighted[n]));
  return out;
}

ObservationModel example1_model(const Vector& true_param) {
  constexpr int kAgents = 5;
  if (true_param.size() != kAgents) throw DimensionMismatch("example1 preset needs a parameter of length 5");
  ObservationModel model;
  model.true_param = true_param;
  for (int n = 0; n < kAgents; ++n) {
    Matrix h = Matrix::Zero(1, kAgents);
    h(0, (n + kAgents - 1) % kAgents) = 1.0;
    h(0, n) = 1.0;
    h(0, (n + 1) % kAgents) = 1.0;
    model.sensing.push_back(std::move(h));
    model.noise_cov.push_back(Matrix::Identity(1, 1));
  }
  return model;
}

ObservationSampler::ObservationSampler(const ObservationModel& model) : noise_(model.noise) {
  check_dimensions(model);
  for (std::size_t n = 0; n < model.num_agents(); ++n) {
    noise_sqrt_.push_back(psd_sqrt(model.noise_cov[n]));
    mean_.push_back(model.sensing[n] * model.true_param);
  }
}

void ObservationSampler::sample(std::size_t agent, Rng& rng, Vector& out) const {
  const auto dim = mean_.at(agent).size();
  thread_local Vector unit;
  unit.resize(dim);
  if (noise_ == NoiseKind::Gaussian) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Eigen::Index i = 0; i < dim; ++i) unit(i) = normal(rng);
  } else {
    // Difference of two unit exponentials is Laplace(0, 1) with variance 2.
    std::exponential_distribution<double> expo(1.0);
    for (Eigen::Index i = 0; i < dim; ++i) unit(i) = (expo(rng) - expo(rng)) * M_SQRT1_2;
  }
  out.noalias() = noise_sqrt_[agent] * unit;
  out += mean_[agent];
}

Vector ObservationSampler::sample(std::size_t agent, Rng& rng) const {
  Vector out;
  sample(agent, rng, out);
  return out;
}

Vector sample_observation(const ObservationModel& model, std::size_t agent, Rng& rng) {
  if (agent >= model.num_agents()) throw std::out_of_range(fmt::format("agent index {} out of range", agent));
  return ObservationSampler(model).sample(agent, rng);
}

Vector centralized_estimate(const ObservationModel& model, const CentralizedSummary& summary,
                            const std::vector<std::vector<Vector>>& observations) {
  if (observations.size() != model.num_agents()) {
    throw DimensionMismatch("observation history must hold one sequence per agent");
  }
  CentralizedEstimator est(model, summary);
  const auto slots = observations.front().size();
  if (slots == 0) throw DimensionMismatch("observation history is empty");
  for (std::size_t n = 0; n < observations.size(); ++n) {
    if (observations[n].size() != slots) throw DimensionMismatch("agents supplied different history lengths");
    for (const auto& y : observations[n]) est.add(n, y);
  }
  for (std::size_t s = 0; s < slots; ++s) est.advance();
  return est.estimate();
}

CentralizedEstimator::CentralizedEstimator(const ObservationModel& model, const CentralizedSummary& summary)
    : asymptotic_cov_(summary.asymptotic_cov) {
  for (std::size_t n = 0; n < model.num_agents(); ++n) {
    Eigen::LLT<Matrix> chol(model.noise_cov[n]);
    weighted_sensing_.push_back(chol.solve(model.sensing[n]).transpose());
    sums_.push_back(Vector::Zero(model.obs_dim(n)));
  }
}

void CentralizedEstimator::add(std::size_t agent, const Vector& y) {
  if (y.size() != sums_.at(agent).size()) throw DimensionMismatch("observation has wrong length");
  sums_[agent] += y;
}

Vector CentralizedEstimator::estimate() const {
  Vector rhs = Vector::Zero(asymptotic_cov_.rows());
  for (std::size_t n = 0; n < sums_.size(); ++n) rhs.noalias() += weighted_sensing_[n] * sums_[n];
  if (slots_ > 0) rhs /= static_cast<double>(slots_);
  return asymptotic_cov_ * rhs;
}

}  // namespace adle
