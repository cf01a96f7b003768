#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "privsub/errors.hpp"
#include "privsub/network.hpp"
#include "privsub/objectives.hpp"
#include "privsub/problem.hpp"
#include "privsub/projection.hpp"
#include "privsub/sync_engine.hpp"
#include "privsub/trace.hpp"

namespace privsub {

// The private times kappa(1) < kappa(2) < ... at which an agent takes a
// subgradient step. Either periodic (offset + j * period) or an explicit list.
class UpdateSchedule {
 public:
  static UpdateSchedule periodic(long offset, long period) {
    if (offset < 0 || period < 1) throw DomainError("periodic schedule needs offset >= 0 and period >= 1");
    UpdateSchedule s;
    s.offset_ = offset;
    s.period_ = period;
    return s;
  }

  static UpdateSchedule explicit_times(std::vector<long> times) {
    for (std::size_t i = 0; i < times.size(); ++i) {
      if (times[i] < 0) throw DomainError("update times must be >= 0");
      if (i > 0 && times[i] <= times[i - 1]) throw DomainError("update times must be strictly increasing");
    }
    UpdateSchedule s;
    s.times_ = std::move(times);
    return s;
  }

  bool is_periodic() const { return period_ > 0; }
  long offset() const { return offset_; }
  long period() const { return period_; }
  const std::vector<long>& times() const { return times_; }

  // r with kappa(r) = k, if k is an update time.
  std::optional<long> update_index(long k) const {
    if (k < 0) return std::nullopt;
    if (is_periodic()) {
      if (k < offset_ || (k - offset_) % period_ != 0) return std::nullopt;
      return (k - offset_) / period_ + 1;
    }
    const auto it = std::lower_bound(times_.begin(), times_.end(), k);
    if (it == times_.end() || *it != k) return std::nullopt;
    return static_cast<long>(it - times_.begin()) + 1;
  }

  // Number of update times in [0, k].
  long count_through(long k) const {
    if (k < 0) return 0;
    if (is_periodic()) return k < offset_ ? 0 : (k - offset_) / period_ + 1;
    return static_cast<long>(std::upper_bound(times_.begin(), times_.end(), k) - times_.begin());
  }

  // Number of update times in [begin, end).
  long count_in(long begin, long end) const { return count_through(end - 1) - count_through(begin - 1); }

 private:
  UpdateSchedule() = default;
  long offset_ = 0;
  long period_ = 0;
  std::vector<long> times_;
};

struct UpdateCheck {
  bool flag = false;
  std::optional<long> index;
};

inline UpdateCheck is_update_time(const UpdateSchedule& s, long k) {
  if (k < 0) throw DomainError("time must be >= 0");
  const auto r = s.update_index(k);
  return {r.has_value(), r};
}

// Least common multiple of the periods; explicit lists have no natural window.
inline long default_window(std::span<const UpdateSchedule> schedules) {
  long t = 1;
  for (const auto& s : schedules) {
    if (!s.is_periodic()) throw ConfigurationError("explicit update lists need an explicit window length");
    t = std::lcm(t, s.period());
  }
  return t;
}

// Outcome of checking that every agent makes the same positive number of
// updates t_i in every window [rT, (r+1)T).
struct UpdateRegularity {
  bool holds = false;
  long window = 0;
  std::vector<long> updates_per_window;  // t_i, or the first window's count when the check fails
  // Horizon over which explicit lists were checked; empty when the verdict is
  // exact (all schedules periodic).
  std::optional<long> validated_horizon;
  std::string reason;
};

inline constexpr long kMinValidatedWindows = 20;

inline UpdateRegularity verify_update_regularity(std::span<const UpdateSchedule> schedules, long window,
                                                 long horizon = 0) {
  if (window < 1) throw DomainError("window length must be >= 1");
  UpdateRegularity rep;
  rep.window = window;
  rep.holds = true;
  const bool all_periodic =
      std::all_of(schedules.begin(), schedules.end(), [](const auto& s) { return s.is_periodic(); });
  const long windows = std::max(kMinValidatedWindows, (horizon + window - 1) / window);
  if (!all_periodic) rep.validated_horizon = windows * window;

  for (std::size_t i = 0; i < schedules.size(); ++i) {
    const auto& s = schedules[i];
    const long first = s.count_in(0, window);
    rep.updates_per_window.push_back(first);
    auto fail = [&](std::string why) {
      if (rep.holds) rep.reason = "agent " + std::to_string(i + 1) + ": " + std::move(why);
      rep.holds = false;
    };
    if (first < 1) {
      fail("no update in window [0, " + std::to_string(window) + ")");
      continue;
    }
    if (s.is_periodic()) {
      // Exact: every window holds T/period updates iff the period divides T
      // and the first update falls inside the first period.
      if (window % s.period() != 0) fail("period " + std::to_string(s.period()) + " does not divide the window");
      else if (s.offset() >= s.period()) fail("offset is not smaller than the period");
      continue;
    }
    for (long r = 1; r < windows; ++r) {
      const long c = s.count_in(r * window, (r + 1) * window);
      if (c != first) {
        fail(std::to_string(c) + " updates in window " + std::to_string(r) + " but " + std::to_string(first) +
             " in window 0");
        break;
      }
    }
  }
  return rep;
}

struct AsyncState {
  long k = 0;
  Eigen::MatrixXd estimates;  // simulated agents x m
  std::vector<long> counters; // updates made so far, per agent
};

struct AsyncStep {
  AsyncState next;
  Eigen::MatrixXd subgradients;  // d_i(k) at x_i(k), applied or not
  std::vector<int> flags;        // 1 when agent i updated at k
  Eigen::MatrixXd omega;         // P_X(avg - d/r) - avg at updates, 0 otherwise
};

namespace detail {
inline AsyncStep async_step_from_average(const Eigen::MatrixXd& average, const AsyncState& state,
                                         std::span<const UpdateSchedule> schedules,
                                         std::span<const ObjectiveSpec> specs, const ProjectionSet& set) {
  const auto agents = state.estimates.rows();
  if (static_cast<Eigen::Index>(schedules.size()) != agents || static_cast<Eigen::Index>(specs.size()) != agents ||
      static_cast<Eigen::Index>(state.counters.size()) != agents)
    throw ConfigurationError("need one schedule, objective and counter per simulated agent");
  AsyncStep out;
  out.next.k = state.k + 1;
  out.next.estimates.resize(agents, state.estimates.cols());
  out.next.counters = state.counters;
  out.subgradients = subgradient_rows(specs, state.estimates);
  out.flags.assign(static_cast<std::size_t>(agents), 0);
  out.omega = Eigen::MatrixXd::Zero(agents, state.estimates.cols());
  for (Eigen::Index i = 0; i < agents; ++i) {
    const Eigen::VectorXd avg = average.row(i).transpose();
    const auto r = schedules[i].update_index(state.k);
    if (!r) {
      out.next.estimates.row(i) = set.project(avg).transpose();
      continue;
    }
    if (*r != state.counters[i] + 1)
      throw ConfigurationError("update counter of agent row " + std::to_string(i) + " disagrees with its schedule");
    const double step = 1.0 / static_cast<double>(*r);
    const Eigen::VectorXd moved = set.project(avg - step * out.subgradients.row(i).transpose());
    out.next.estimates.row(i) = moved.transpose();
    out.next.counters[i] = *r;
    out.flags[i] = 1;
    out.omega.row(i) = (moved - avg).transpose();
  }
  return out;
}
}  // namespace detail

// One step of the projected asynchronous algorithm: each agent averages its
// neighbours, then either takes a 1/r subgradient step (r = its own update
// count) or not, and projects onto X.
inline AsyncStep async_step(const Eigen::MatrixXd& weights, const AsyncState& state,
                            std::span<const UpdateSchedule> schedules, std::span<const ObjectiveSpec> specs,
                            const ProjectionSet& set) {
  return detail::async_step_from_average(consensus_step(weights, state.estimates), state, schedules, specs, set);
}

inline AsyncStep async_step(const AdjacencyPartition& p, const AsyncState& state, const Eigen::RowVectorXd& u,
                            std::span<const UpdateSchedule> schedules, std::span<const ObjectiveSpec> specs,
                            const ProjectionSet& set) {
  return detail::async_step_from_average(consensus_step(p, state.estimates, u), state, schedules, specs, set);
}

struct AsyncProblem {
  NetworkProblem network;
  std::vector<UpdateSchedule> schedules;  // one per network agent
  ProjectionSet set = ProjectionSet::interval(-10.0, 10.0);
  std::optional<long> window;             // defaults to the lcm of the periods
};

// Refuses to start when the update-count regularity check fails or when X
// misses the unconstrained minimizer (checked whenever that is computable).
inline Trace run_async(const AsyncProblem& problem, long horizon,
                       const std::optional<InputSequence>& input = std::nullopt) {
  const auto& net = problem.network;
  net.validate();
  if (horizon < 0) throw DomainError("horizon must be >= 0");
  if (static_cast<int>(problem.schedules.size()) != net.size())
    throw ConfigurationError("need one update schedule per agent");
  if (problem.set.dimension() != net.dimension()) throw DomainError("projection set dimension mismatch");
  check_inputs(input, horizon, net.dimension());

  const bool injected = input.has_value();
  const auto agents = net.simulated_agents(injected);
  std::vector<UpdateSchedule> schedules;
  std::vector<ObjectiveSpec> specs;
  for (int a : agents) {
    schedules.push_back(problem.schedules[a]);
    specs.push_back(net.objectives[a]);
  }
  const long window = problem.window.value_or(default_window(schedules));
  const auto regularity = verify_update_regularity(schedules, window, horizon);
  if (!regularity.holds)
    throw ConfigurationError("update schedules violate the constant-updates-per-window condition (T=" +
                             std::to_string(window) + "): " + regularity.reason);
  if (!injected) {
    try {
      const auto opt = sum_minimizer(net.objectives, std::nullopt);
      if (!problem.set.contains(opt.point))
        throw ConfigurationError("projection set does not contain the minimizer of the sum objective");
    } catch (const UnsupportedError&) {
    }
  }

  AsyncState state;
  state.estimates.resize(static_cast<Eigen::Index>(agents.size()), net.dimension());
  for (std::size_t r = 0; r < agents.size(); ++r)
    state.estimates.row(static_cast<Eigen::Index>(r)) = net.initial.row(agents[r]);
  state.estimates = project_rows(problem.set, state.estimates);
  state.counters.assign(agents.size(), 0);
  std::optional<AdjacencyPartition> part;
  if (injected) part = partition(net.weights, net.malicious_index());

  Trace t;
  t.visible.agents = agents;
  t.visible.dimension = net.dimension();
  t.visible.states.reserve(static_cast<std::size_t>(horizon) + 1);
  t.visible.states.push_back(state.estimates);
  for (long k = 0; k < horizon; ++k) {
    AsyncStep step;
    if (injected) {
      const Eigen::RowVectorXd u = (*input)[static_cast<std::size_t>(k)].transpose();
      step = async_step(*part, state, u, schedules, specs, problem.set);
      t.visible.inputs.push_back(u.transpose());
    } else {
      step = async_step(net.weights, state, schedules, specs, problem.set);
    }
    t.oracle.subgradients.push_back(std::move(step.subgradients));
    t.oracle.update_flags.push_back(std::move(step.flags));
    t.oracle.counters.push_back(step.next.counters);
    t.oracle.omega.push_back(std::move(step.omega));
    state = std::move(step.next);
    t.visible.states.push_back(state.estimates);
  }
  return t;
}

}  // namespace privsub
