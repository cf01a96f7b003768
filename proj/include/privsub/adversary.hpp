#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "privsub/errors.hpp"
#include "privsub/stepsize.hpp"
#include "privsub/trace.hpp"

// The malicious agent's side: probe inputs, windowed least-squares recovery
// of (A, b) and subgradient extraction. Everything here consumes
// VisibleTrace only.
namespace privsub {

inline constexpr double kSingularTolerance = 1e-10;

// n-1 zeros followed by n ones.
inline std::vector<double> probe_sequence(int n) {
  if (n < 2) throw DomainError("probe needs a network of at least two agents");
  std::vector<double> u(static_cast<std::size_t>(2 * n - 1), 0.0);
  for (int k = n - 1; k < 2 * n - 1; ++k) u[static_cast<std::size_t>(k)] = 1.0;
  return u;
}

// Global time of offset k inside probe window r: r (2n - 1) + k.
inline long probe_time(int n, long r, int k) { return r * (2L * n - 1) + k; }

inline std::vector<double> windowed_probe(int n, long windows) {
  if (windows < 1) throw DomainError("need at least one probe window");
  const auto one = probe_sequence(n);
  std::vector<double> u;
  u.reserve(one.size() * static_cast<std::size_t>(windows));
  for (long r = 0; r < windows; ++r) u.insert(u.end(), one.begin(), one.end());
  return u;
}

struct ProbeSchedule {
  int n = 2;
  long windows = 1;

  long window_length() const { return 2L * n - 1; }
  long start(long r) const { return probe_time(n, r, 0); }
  std::vector<double> sequence() const { return windowed_probe(n, windows); }
};

// Z = (A, b) Y for one window. Y is n x 2n: a leading (1; 1) column then
// (x(t); u(t)) for the 2n-1 window times. Z is (n-1) x 2n: a leading ones
// column then x(t+1).
struct DataWindow {
  Eigen::MatrixXd Y;
  Eigen::MatrixXd Z;
};

// `states` holds x(s), ..., x(s + 2n - 1); `inputs` holds u(s), ..., u(s + 2n - 2).
inline DataWindow assemble_YZ(std::span<const Eigen::VectorXd> states, std::span<const double> inputs) {
  if (states.empty()) throw DomainError("window has no states");
  const auto dim = states.front().size();  // n - 1
  const auto cols = 2 * (dim + 1);          // 2n
  if (static_cast<Eigen::Index>(states.size()) < cols || static_cast<Eigen::Index>(inputs.size()) < cols - 1)
    throw DomainError("window too short: need " + std::to_string(cols) + " states and " + std::to_string(cols - 1) +
                      " inputs");
  DataWindow w;
  w.Y.resize(dim + 1, cols);
  w.Z.resize(dim, cols);
  w.Y.col(0).setOnes();
  w.Z.col(0).setOnes();
  for (Eigen::Index j = 0; j + 1 < cols; ++j) {
    w.Y.col(j + 1).head(dim) = states[static_cast<std::size_t>(j)];
    w.Y(dim, j + 1) = inputs[static_cast<std::size_t>(j)];
    w.Z.col(j + 1) = states[static_cast<std::size_t>(j + 1)];
  }
  return w;
}

// Window starting at time `start`, for coordinate `coord`.
inline DataWindow assemble_window(const VisibleTrace& trace, long start, int coord) {
  const long len = 2L * trace.agent_count() + 1;  // 2n - 1 with n = agents + 1
  if (!trace.has_inputs()) throw DomainError("trace carries no injected inputs");
  if (start < 0 || start + len > trace.horizon())
    throw DomainError("window [" + std::to_string(start) + ", " + std::to_string(start + len) +
                      "] exceeds the trace horizon");
  std::vector<Eigen::VectorXd> xs;
  std::vector<double> us;
  for (long t = start; t <= start + len; ++t) xs.push_back(trace.states[static_cast<std::size_t>(t)].col(coord));
  for (long t = start; t < start + len; ++t) us.push_back(trace.inputs[static_cast<std::size_t>(t)](coord));
  return assemble_YZ(xs, us);
}

struct Recovery {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  // Smallest singular value of Y Y'.
  double conditioning = 0.0;

  Eigen::MatrixXd stacked() const {
    Eigen::MatrixXd w(A.rows(), A.cols() + 1);
    w << A, b;
    return w;
  }
};

// Least-squares (A, b) = Z Y'(Y Y')^{-1}, solved through a QR factorization of
// Y' instead of forming the inverse.
inline Recovery recover_adjacency(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& Z,
                                  double tol = kSingularTolerance) {
  if (Y.cols() != Z.cols() || Y.rows() != Z.rows() + 1) throw DomainError("Y must be n x N and Z (n-1) x N");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Y);
  const auto& s = svd.singularValues();
  const double smin = s.size() ? s(s.size() - 1) : 0.0;
  const double smax = s.size() ? s(0) : 0.0;
  if (Y.cols() < Y.rows() || smax == 0.0 || smin < tol * smax)
    throw SingularDataError("probe data matrix Y is rank deficient", smin * smin);
  const Eigen::MatrixXd w = Y.transpose().householderQr().solve(Z.transpose()).transpose();
  Recovery r;
  r.A = w.leftCols(w.cols() - 1);
  r.b = w.col(w.cols() - 1);
  r.conditioning = smin * smin;
  return r;
}

struct WindowEstimate {
  long window = 0;
  long start = 0;
  std::vector<DataWindow> data;          // one per coordinate
  std::optional<Eigen::MatrixXd> estimate;  // stacked (A_r, b_r); empty when every coordinate is singular
  double conditioning = 0.0;             // worst usable coordinate
  bool singular = false;
};

struct RecoveryErrors {
  std::vector<double> window_errors;     // Frobenius distance; NaN for skipped windows
  Eigen::MatrixXd subgradient_errors;    // K x agents, Euclidean over coordinates
};

struct RecoveryReport {
  std::vector<WindowEstimate> windows;
  std::optional<Eigen::MatrixXd> final_estimate;
  long final_window = -1;
  std::vector<Eigen::MatrixXd> subgradient_estimates;  // K matrices, agents x m
  std::optional<RecoveryErrors> errors;

  bool recovered() const { return final_estimate.has_value(); }
};

// Recovers each window independently. Per-coordinate estimates are averaged
// with weights equal to their conditioning.
inline std::vector<WindowEstimate> recover_windows(const VisibleTrace& trace, const ProbeSchedule& probe,
                                                   double tol = kSingularTolerance) {
  if (probe.n != trace.agent_count() + 1) throw DomainError("probe size does not match the observed network");
  std::vector<WindowEstimate> out;
  for (long r = 0; r < probe.windows; ++r) {
    WindowEstimate we;
    we.window = r;
    we.start = probe.start(r);
    if (we.start + probe.window_length() > trace.horizon()) break;
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(trace.agent_count(), trace.agent_count() + 1);
    double weight = 0.0;
    double worst = std::numeric_limits<double>::infinity();
    for (int c = 0; c < trace.dimension; ++c) {
      we.data.push_back(assemble_window(trace, we.start, c));
      try {
        const auto rec = recover_adjacency(we.data.back().Y, we.data.back().Z, tol);
        acc += rec.conditioning * rec.stacked();
        weight += rec.conditioning;
        worst = std::min(worst, rec.conditioning);
      } catch (const SingularDataError& e) {
        if (trace.dimension == 1) worst = e.conditioning();
      }
    }
    if (weight > 0.0) {
      we.estimate = acc / weight;
      we.conditioning = worst;
    } else {
      we.singular = true;
      we.conditioning = std::isfinite(worst) ? worst : 0.0;
    }
    out.push_back(std::move(we));
  }
  return out;
}

// d_hat(k) = (A_hat x(k) + b_hat u(k) - x(k+1)) / alpha_k for every k < K.
inline std::vector<Eigen::MatrixXd> extract_subgradients(const VisibleTrace& trace, const Eigen::MatrixXd& stacked,
                                                         const StepsizeSchedule& stepsize) {
  if (!trace.has_inputs()) throw DomainError("trace carries no injected inputs");
  const auto agents = trace.agent_count();
  if (stacked.rows() != agents || stacked.cols() != agents + 1) throw DomainError("(A, b) has the wrong shape");
  const Eigen::MatrixXd A = stacked.leftCols(agents);
  const Eigen::VectorXd b = stacked.col(agents);
  std::vector<Eigen::MatrixXd> out;
  out.reserve(static_cast<std::size_t>(trace.horizon()));
  for (long k = 0; k < trace.horizon(); ++k) {
    const auto i = static_cast<std::size_t>(k);
    const Eigen::MatrixXd predicted = A * trace.states[i] + b * trace.inputs[i].transpose();
    out.push_back((predicted - trace.states[i + 1]) / stepsize.at(k));
  }
  return out;
}

namespace detail {
inline RecoveryReport run_attack(const VisibleTrace& trace, const ProbeSchedule& probe,
                                 const StepsizeSchedule& stepsize) {
  RecoveryReport rep;
  rep.windows = recover_windows(trace, probe);
  for (auto it = rep.windows.rbegin(); it != rep.windows.rend(); ++it) {
    if (it->estimate) {
      rep.final_estimate = *it->estimate;
      rep.final_window = it->window;
      break;
    }
  }
  if (rep.final_estimate) rep.subgradient_estimates = extract_subgradients(trace, *rep.final_estimate, stepsize);
  return rep;
}
}  // namespace detail

// Single probe window against pure consensus dynamics.
inline RecoveryReport attack_consensus(const VisibleTrace& trace) {
  RecoveryReport rep;
  rep.windows = recover_windows(trace, ProbeSchedule{trace.agent_count() + 1, 1});
  if (!rep.windows.empty() && rep.windows.front().estimate) {
    rep.final_estimate = rep.windows.front().estimate;
    rep.final_window = 0;
  }
  return rep;
}

// The adversary is granted the common stepsize schedule of the synchronous algorithm.
inline RecoveryReport attack_dssoa(const VisibleTrace& trace, const ProbeSchedule& probe,
                                   const StepsizeSchedule& known_stepsize) {
  return detail::run_attack(trace, probe, known_stepsize);
}

// Same pipeline; the stepsize is the adversary's guess, since the real ones
// (1/r with private counters) are not observable.
inline RecoveryReport attack_async(const VisibleTrace& trace, const ProbeSchedule& probe,
                                   const StepsizeSchedule& assumed_stepsize) {
  return detail::run_attack(trace, probe, assumed_stepsize);
}

// Fills the error fields from ground truth held by the caller.
inline void score_report(RecoveryReport& rep, const Eigen::MatrixXd& true_stacked,
                         std::span<const Eigen::MatrixXd> true_subgradients = {}) {
  RecoveryErrors e;
  for (const auto& w : rep.windows)
    e.window_errors.push_back(w.estimate ? (*w.estimate - true_stacked).norm()
                                         : std::numeric_limits<double>::quiet_NaN());
  if (!true_subgradients.empty() && !rep.subgradient_estimates.empty()) {
    const auto K = std::min(rep.subgradient_estimates.size(), true_subgradients.size());
    e.subgradient_errors.resize(static_cast<Eigen::Index>(K), rep.subgradient_estimates.front().rows());
    for (std::size_t k = 0; k < K; ++k)
      e.subgradient_errors.row(static_cast<Eigen::Index>(k)) =
          (rep.subgradient_estimates[k] - true_subgradients[k]).rowwise().norm().transpose();
  }
  rep.errors = std::move(e);
}

}  // namespace privsub
