#include "adle/adle.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "adle/error.hpp"

namespace adle {

namespace {

// Solves (m) X = rhs for a regularized symmetric matrix. The Cholesky path is
// the normal case; LU only kicks in if early consensus overshoot has pushed
// G_n + gamma I out of the positive definite cone.
template <class Rhs>
Matrix solve_regularized(const Matrix& m, const Rhs& rhs) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() == Eigen::Success) return llt.solve(rhs);
  return Eigen::PartialPivLU<Matrix>(m).solve(rhs);
}

void check_agent_count(const NetworkState& net, const ObservationModel& model) {
  if (net.agents.size() != model.num_agents()) {
    throw DimensionMismatch(
        fmt::format("network state has {} agents, model has {}", net.agents.size(), model.num_agents()));
  }
}

void symmetrize_in_place(Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < m.cols(); ++j) {
      const double avg = 0.5 * (m(i, j) + m(j, i));
      m(i, j) = avg;
      m(j, i) = avg;
    }
  }
}

}  // namespace

NetworkState initial_state(const ObservationModel& model) {
  NetworkState net;
  const auto dim = model.param_dim();
  for (std::size_t n = 0; n < model.num_agents(); ++n) {
    const auto obs = model.obs_dim(n);
    net.agents.push_back(AgentState{
        .estimate = Vector::Zero(dim),
        .grammian_est = Matrix::Zero(dim, dim),
        .sample_cov = Matrix::Zero(obs, obs),
        .obs_sum = Vector::Zero(obs),
        .obs_outer_sum = Matrix::Zero(obs, obs),
        .samples_seen = 0,
    });
  }
  return net;
}

Problem make_problem(ObservationModel model, TopologyModel topology, WeightSchedule schedule,
                     ProblemOptions options) {
  auto summary = validate_observation_model(model);
  if (topology.num_nodes() != model.num_agents()) {
    throw DimensionMismatch(fmt::format("topology has {} nodes but the model has {} agents", topology.num_nodes(),
                                        model.num_agents()));
  }
  const double lambda2 = model.num_agents() > 1 ? validate_mean_connectivity(topology) : 0.0;
  if (options.cap_consensus_weight) {
    const auto max_degree = topology.base().max_degree();
    if (max_degree > 0) schedule.b = std::min(schedule.b, 1.0 / static_cast<double>(max_degree));
  }
  schedule = validate_schedule(schedule, options.require_efficiency);
  return Problem{std::move(model), std::move(summary), std::move(topology), schedule, lambda2};
}

void update_sample_covariance(AgentState& state, const Vector& y) {
  if (y.size() != state.obs_sum.size()) {
    throw DimensionMismatch(fmt::format("observation of length {}, expected {}", y.size(), state.obs_sum.size()));
  }
  state.obs_sum += y;
  state.obs_outer_sum.noalias() += y * y.transpose();
  ++state.samples_seen;
  const double k = static_cast<double>(state.samples_seen);
  const Vector mean = state.obs_sum / k;
  state.sample_cov = state.obs_outer_sum / k;
  state.sample_cov.noalias() -= mean * mean.transpose();
  state.sample_cov = 0.5 * (state.sample_cov + state.sample_cov.transpose()).eval();
}

Matrix compute_gain(const AgentState& state, const Matrix& sensing, double gamma) {
  if (!(gamma > 0.0)) throw Error(fmt::format("gain regularizer must be positive, got {}", gamma));
  const auto dim = state.grammian_est.rows();
  const auto obs = state.sample_cov.rows();
  // H^T (Q + gamma I)^-1, using symmetry of Q + gamma I.
  const Matrix weighted =
      solve_regularized(state.sample_cov + gamma * Matrix::Identity(obs, obs), sensing).transpose();
  return solve_regularized(state.grammian_est + gamma * Matrix::Identity(dim, dim), weighted);
}

Matrix innovation_grammian(const Matrix& sensing, const Matrix& sample_cov, double gamma) {
  const auto obs = sample_cov.rows();
  const Matrix d = sensing.transpose() * solve_regularized(sample_cov + gamma * Matrix::Identity(obs, obs), sensing);
  return 0.5 * (d + d.transpose());
}

void update_grammian(NetworkState& net, const Laplacian& lap, const ObservationModel& model,
                     const WeightSchedule& schedule, std::uint64_t t) {
  check_agent_count(net, model);
  const double alpha = schedule.alpha(t);
  const double beta = schedule.beta(t);
  const double gamma = schedule.gamma(t);
  const auto num_agents = net.agents.size();

  std::vector<Matrix> consensus(num_agents, Matrix::Zero(model.param_dim(), model.param_dim()));
  for (const auto& e : lap.edges()) {
    const Matrix diff = net.agents[e.first].grammian_est - net.agents[e.second].grammian_est;
    consensus[e.first] += diff;
    consensus[e.second] -= diff;
  }
  std::vector<Matrix> next(num_agents);
  for (std::size_t n = 0; n < num_agents; ++n) {
    const auto& g = net.agents[n].grammian_est;
    const Matrix target = innovation_grammian(model.sensing[n], net.agents[n].sample_cov, gamma);
    next[n] = g - beta * consensus[n] + alpha * (target - g);
  }
  for (std::size_t n = 0; n < num_agents; ++n) net.agents[n].grammian_est = std::move(next[n]);
}

void update_estimates(NetworkState& net, const Laplacian& lap, std::span<const Matrix> gains,
                      std::span<const Vector> observations, const ObservationModel& model,
                      const WeightSchedule& schedule, std::uint64_t t) {
  check_agent_count(net, model);
  const auto num_agents = net.agents.size();
  if (gains.size() != num_agents || observations.size() != num_agents) {
    throw DimensionMismatch("need one gain and one observation per agent");
  }
  const double alpha = schedule.alpha(t);
  const double beta = schedule.beta(t);

  std::vector<Vector> consensus(num_agents, Vector::Zero(model.param_dim()));
  for (const auto& e : lap.edges()) {
    const Vector diff = net.agents[e.first].estimate - net.agents[e.second].estimate;
    consensus[e.first] += diff;
    consensus[e.second] -= diff;
  }
  std::vector<Vector> next(num_agents);
  for (std::size_t n = 0; n < num_agents; ++n) {
    const auto& x = net.agents[n].estimate;
    if (gains[n].rows() != model.param_dim() || gains[n].cols() != model.obs_dim(n) ||
        observations[n].size() != model.obs_dim(n)) {
      throw DimensionMismatch(fmt::format("agent {}: gain or observation has the wrong shape", n));
    }
    next[n] = x - beta * consensus[n] + alpha * gains[n] * (observations[n] - model.sensing[n] * x);
  }
  for (std::size_t n = 0; n < num_agents; ++n) net.agents[n].estimate = std::move(next[n]);
}

AdleEngine::AdleEngine(const Problem& problem) : problem_(&problem), sampler_(problem.model) {
  const auto& model = problem.model;
  const auto num_agents = model.num_agents();
  const auto dim = model.param_dim();
  observations_.resize(num_agents);
  innovation_.assign(num_agents, Matrix::Zero(dim, dim));
  correction_.assign(num_agents, Vector::Zero(dim));
  consensus_x_.assign(num_agents, Vector::Zero(dim));
  consensus_g_.assign(num_agents, Matrix::Zero(dim, dim));
  weighted_sensing_.resize(num_agents);
  for (std::size_t n = 0; n < num_agents; ++n) {
    observations_[n] = Vector::Zero(model.obs_dim(n));
    weighted_sensing_[n] = Matrix::Zero(dim, model.obs_dim(n));
  }
  regularized_ = Matrix::Zero(dim, dim);
  edges_.reserve(problem.topology.base().edges().size());
}

void AdleEngine::step(NetworkState& net, Rng& rng) {
  const auto& model = problem_->model;
  const auto& schedule = problem_->schedule;
  check_agent_count(net, model);
  const auto num_agents = net.agents.size();
  const auto t = net.step;
  const double alpha = schedule.alpha(t);
  const double beta = schedule.beta(t);
  const double gamma = schedule.gamma(t);

  problem_->topology.sample_into(rng, edges_);
  for (std::size_t n = 0; n < num_agents; ++n) sampler_.sample(n, rng, observations_[n]);

  for (std::size_t n = 0; n < num_agents; ++n) {
    const auto& agent = net.agents[n];
    const auto& h = model.sensing[n];
    // W = H^T (Q + gamma I)^-1; D = W H; innovation direction W (y - H x).
    regularized_obs_ = agent.sample_cov;
    regularized_obs_.diagonal().array() += gamma;
    solved_obs_ = h;
    obs_llt_.compute(regularized_obs_);
    if (obs_llt_.info() == Eigen::Success) {
      obs_llt_.solveInPlace(solved_obs_);
    } else {
      solved_obs_ = Eigen::PartialPivLU<Matrix>(regularized_obs_).solve(h);
    }
    weighted_sensing_[n] = solved_obs_.transpose();
    innovation_[n].noalias() = weighted_sensing_[n] * h;
    symmetrize_in_place(innovation_[n]);
    residual_ = observations_[n];
    residual_.noalias() -= h * agent.estimate;
    direction_.noalias() = weighted_sensing_[n] * residual_;
    regularized_ = agent.grammian_est;
    regularized_.diagonal().array() += gamma;
    param_llt_.compute(regularized_);
    if (param_llt_.info() == Eigen::Success) {
      param_llt_.solveInPlace(direction_);
      correction_[n] = direction_;
    } else {
      correction_[n] = Eigen::PartialPivLU<Matrix>(regularized_).solve(direction_);
    }
    consensus_x_[n].setZero();
    consensus_g_[n].setZero();
  }
  for (const auto& e : edges_) {
    const auto& a = net.agents[e.first];
    const auto& b = net.agents[e.second];
    consensus_x_[e.first] += a.estimate - b.estimate;
    consensus_x_[e.second] -= a.estimate - b.estimate;
    consensus_g_[e.first] += a.grammian_est - b.grammian_est;
    consensus_g_[e.second] -= a.grammian_est - b.grammian_est;
  }
  for (std::size_t n = 0; n < num_agents; ++n) {
    auto& agent = net.agents[n];
    agent.estimate += -beta * consensus_x_[n] + alpha * correction_[n];
    agent.grammian_est += -beta * consensus_g_[n] + alpha * (innovation_[n] - agent.grammian_est);

    const auto& y = observations_[n];
    agent.obs_sum += y;
    agent.obs_outer_sum.noalias() += y * y.transpose();
    ++agent.samples_seen;
    const double k = static_cast<double>(agent.samples_seen);
    mean_ = agent.obs_sum / k;
    agent.sample_cov = agent.obs_outer_sum / k;
    agent.sample_cov.noalias() -= mean_ * mean_.transpose();
  }
  ++net.step;
}

StepDiagnostics AdleEngine::diagnostics(const NetworkState& net) const {
  const auto& model = problem_->model;
  const auto& summary = problem_->summary;
  const double gamma = problem_->schedule.gamma(net.step);
  StepDiagnostics out;
  out.disagreement = max_disagreement(net);
  out.errors.reserve(net.agents.size());
  for (std::size_t n = 0; n < net.agents.size(); ++n) {
    const auto& agent = net.agents[n];
    out.errors.push_back((agent.estimate - model.true_param).norm());
    const Matrix gain = compute_gain(agent, model.sensing[n], gamma);
    out.gain_gap = std::max(out.gain_gap, (gain - summary.optimal_gains[n]).norm());
  }
  out.grammian_gap = (average_grammian(net) - summary.grammian_norm).norm();
  return out;
}

double max_disagreement(const NetworkState& net) {
  double worst = 0.0;
  for (std::size_t n = 0; n < net.agents.size(); ++n) {
    for (std::size_t l = n + 1; l < net.agents.size(); ++l) {
      worst = std::max(worst, (net.agents[n].estimate - net.agents[l].estimate).norm());
    }
  }
  return worst;
}

Matrix average_grammian(const NetworkState& net) {
  Matrix sum = Matrix::Zero(net.agents.front().grammian_est.rows(), net.agents.front().grammian_est.cols());
  for (const auto& agent : net.agents) sum += agent.grammian_est;
  return sum / static_cast<double>(net.agents.size());
}

}  // namespace adle
