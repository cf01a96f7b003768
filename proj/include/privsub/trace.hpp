#pragma once

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace privsub {

// Everything the malicious agent can observe: the estimates it receives, its
// own injected values and (as a granted capability for the synchronous
// algorithm) the common stepsize. Schedules, update counters and subgradients
// are deliberately absent from this type.
struct VisibleTrace {
  std::vector<int> agents;                // network ids of recorded agents, row order
  int dimension = 1;
  std::vector<Eigen::MatrixXd> states;    // K+1 matrices, agents x dimension
  std::vector<Eigen::VectorXd> inputs;    // K injected values u(k), empty without a malicious agent
  std::vector<double> stepsizes;          // K common stepsizes, empty for asynchronous runs

  long horizon() const { return static_cast<long>(states.size()) - 1; }
  int agent_count() const { return static_cast<int>(agents.size()); }
  bool has_inputs() const { return !inputs.empty(); }

  bool operator==(const VisibleTrace&) const = default;
};

// Ground truth for test oracles and error reporting. Adversary code never
// takes this type.
struct OracleTrace {
  // d_i(k): the agent's private subgradient at x_i(k), whether or not it was applied.
  std::vector<Eigen::MatrixXd> subgradients;
  // Asynchronous diagnostics, one entry per step k < K.
  std::vector<std::vector<int>> update_flags;  // chi_{i,k}
  std::vector<std::vector<long>> counters;     // r_i(k) after step k
  std::vector<Eigen::MatrixXd> omega;          // omega_i(k)

  bool asynchronous() const { return !update_flags.empty(); }
  bool operator==(const OracleTrace&) const = default;
};

struct Trace {
  VisibleTrace visible;
  OracleTrace oracle;

  // epsilon(k) = alpha_k d(k) for synchronous traces.
  Eigen::MatrixXd perturbation(long k) const {
    return visible.stepsizes.at(static_cast<std::size_t>(k)) * oracle.subgradients.at(static_cast<std::size_t>(k));
  }
};

}  // namespace privsub
