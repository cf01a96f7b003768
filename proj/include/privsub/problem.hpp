#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

#include "privsub/errors.hpp"
#include "privsub/network.hpp"
#include "privsub/objectives.hpp"

namespace privsub {

// u(0), u(1), ... injected by the malicious agent, one m-vector per step.
using InputSequence = std::vector<Eigen::VectorXd>;

inline InputSequence scalar_inputs(const std::vector<double>& u, int dimension) {
  InputSequence out;
  out.reserve(u.size());
  for (double v : u) out.push_back(Eigen::VectorXd::Constant(dimension, v));
  return out;
}

// Network, objectives and initial estimates shared by both engines. Rows of
// `initial` and entries of `objectives` are indexed by network agent id.
struct NetworkProblem {
  Eigen::MatrixXd weights;
  std::vector<ObjectiveSpec> objectives;
  Eigen::MatrixXd initial;
  // Used only when an input sequence is supplied; defaults to the last agent.
  std::optional<int> malicious;

  int size() const { return static_cast<int>(weights.rows()); }
  int dimension() const { return static_cast<int>(initial.cols()); }
  int malicious_index() const { return malicious.value_or(size() - 1); }

  void validate() const {
    const int n = size();
    if (weights.cols() != n || n < 1) throw DomainError("weight matrix must be square and nonempty");
    if (static_cast<int>(objectives.size()) != n)
      throw DomainError("need one objective per agent (" + std::to_string(n) + ")");
    if (initial.rows() != n) throw DomainError("need one initial estimate per agent");
    for (const auto& o : objectives)
      if (o.dimension() != dimension()) throw DomainError("objective dimension differs from estimate dimension");
    if (malicious && (*malicious < 0 || *malicious >= n)) throw DomainError("malicious index out of range");
  }

  // Agents that run the algorithm: everyone, or everyone but the malicious agent.
  std::vector<int> simulated_agents(bool with_input) const {
    std::vector<int> ids;
    for (int i = 0; i < size(); ++i)
      if (!with_input || i != malicious_index()) ids.push_back(i);
    return ids;
  }
};

inline void check_inputs(const std::optional<InputSequence>& input, long horizon, int dimension) {
  if (!input) return;
  if (static_cast<long>(input->size()) < horizon)
    throw ConfigurationError("malicious input has " + std::to_string(input->size()) +
                             " values but the horizon is " + std::to_string(horizon));
  for (const auto& u : *input)
    if (u.size() != dimension) throw DomainError("malicious input dimension mismatch");
}

}  // namespace privsub
