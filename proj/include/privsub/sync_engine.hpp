#pragma once

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <vector>

#include "privsub/errors.hpp"
#include "privsub/network.hpp"
#include "privsub/objectives.hpp"
#include "privsub/problem.hpp"
#include "privsub/stepsize.hpp"
#include "privsub/trace.hpp"

namespace privsub {

// x(k+1) = A x(k) + b u(k), applied to each coordinate column.
inline Eigen::MatrixXd consensus_step(const AdjacencyPartition& p, const Eigen::MatrixXd& x,
                                      const Eigen::RowVectorXd& u) {
  if (x.rows() != p.regular_count() || u.size() != x.cols())
    throw DomainError("consensus step dimension mismatch");
  return p.A * x + p.b * u;
}

inline Eigen::VectorXd consensus_step(const AdjacencyPartition& p, const Eigen::VectorXd& x, double u) {
  return consensus_step(p, Eigen::MatrixXd(x), Eigen::RowVectorXd::Constant(1, u)).col(0);
}

inline Eigen::MatrixXd consensus_step(const Eigen::MatrixXd& weights, const Eigen::MatrixXd& x) {
  if (weights.rows() != weights.cols() || x.rows() != weights.cols())
    throw DomainError("consensus step dimension mismatch");
  return weights * x;
}

struct SyncStep {
  Eigen::MatrixXd next;
  Eigen::MatrixXd subgradients;
};

namespace detail {
inline Eigen::MatrixXd subgradient_rows(std::span<const ObjectiveSpec> specs, const Eigen::MatrixXd& x) {
  if (static_cast<Eigen::Index>(specs.size()) != x.rows()) throw DomainError("need one objective per simulated agent");
  Eigen::MatrixXd d(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) d.row(i) = subgradient(specs[i], x.row(i).transpose()).transpose();
  return d;
}
}  // namespace detail

// x_i(k+1) = sum_j a_ij x_j(k) + b_i u(k) - alpha_k d_i(k), d_i(k) taken at x_i(k).
// `specs` lists the regular agents' objectives in row order.
inline SyncStep dssoa_step(const AdjacencyPartition& p, const Eigen::MatrixXd& x, const Eigen::RowVectorXd& u,
                           double alpha, std::span<const ObjectiveSpec> specs) {
  SyncStep s;
  s.subgradients = detail::subgradient_rows(specs, x);
  s.next = consensus_step(p, x, u) - alpha * s.subgradients;
  return s;
}

inline SyncStep dssoa_step(const Eigen::MatrixXd& weights, const Eigen::MatrixXd& x, double alpha,
                           std::span<const ObjectiveSpec> specs) {
  SyncStep s;
  s.subgradients = detail::subgradient_rows(specs, x);
  s.next = consensus_step(weights, x) - alpha * s.subgradients;
  return s;
}

struct SyncProblem {
  NetworkProblem network;
  StepsizeSchedule stepsize = StepsizeSchedule::harmonic();
};

// Runs K steps. Without an input sequence all n agents follow the algorithm
// with the full weight matrix; with one, the malicious agent transmits u(k)
// and only the regular agents are recorded.
inline Trace run_sync(const SyncProblem& problem, long horizon,
                      const std::optional<InputSequence>& input = std::nullopt) {
  const auto& net = problem.network;
  net.validate();
  if (horizon < 0) throw DomainError("horizon must be >= 0");
  check_inputs(input, horizon, net.dimension());

  const bool injected = input.has_value();
  const auto agents = net.simulated_agents(injected);
  std::vector<ObjectiveSpec> specs;
  Eigen::MatrixXd x(static_cast<Eigen::Index>(agents.size()), net.dimension());
  for (std::size_t r = 0; r < agents.size(); ++r) {
    specs.push_back(net.objectives[agents[r]]);
    x.row(static_cast<Eigen::Index>(r)) = net.initial.row(agents[r]);
  }
  std::optional<AdjacencyPartition> part;
  if (injected) part = partition(net.weights, net.malicious_index());

  Trace t;
  t.visible.agents = agents;
  t.visible.dimension = net.dimension();
  t.visible.states.reserve(static_cast<std::size_t>(horizon) + 1);
  t.visible.states.push_back(x);
  for (long k = 0; k < horizon; ++k) {
    const double alpha = problem.stepsize.at(k);
    SyncStep step;
    if (injected) {
      const Eigen::RowVectorXd u = (*input)[static_cast<std::size_t>(k)].transpose();
      step = dssoa_step(*part, x, u, alpha, specs);
      t.visible.inputs.push_back(u.transpose());
    } else {
      step = dssoa_step(net.weights, x, alpha, specs);
    }
    t.visible.stepsizes.push_back(alpha);
    t.oracle.subgradients.push_back(std::move(step.subgradients));
    x = std::move(step.next);
    t.visible.states.push_back(x);
  }
  return t;
}

}  // namespace privsub
