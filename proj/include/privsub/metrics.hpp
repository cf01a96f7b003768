#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "privsub/errors.hpp"
#include "privsub/linalg.hpp"
#include "privsub/objectives.hpp"
#include "privsub/trace.hpp"

namespace privsub {

// h = max_{i,j} |x_i - x_j| over the rows of an agents x m matrix.
inline double disagreement(const Eigen::MatrixXd& estimates) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < estimates.rows(); ++i)
    for (Eigen::Index j = i + 1; j < estimates.rows(); ++j)
      h = std::max(h, (estimates.row(i) - estimates.row(j)).norm());
  return h;
}

inline Eigen::VectorXd average(const Eigen::MatrixXd& estimates) {
  if (estimates.rows() == 0) throw DomainError("no estimates to average");
  return estimates.colwise().mean().transpose();
}

// sum_i f_i(xbar) - f*, floored at -1e-12.
inline double optimality_gap(const Eigen::MatrixXd& estimates, std::span<const ObjectiveSpec> specs,
                             double optimal_value) {
  return std::max(total_objective(specs, average(estimates)) - optimal_value, -1e-12);
}

// ||x(0)||_inf + (u* + alpha* L) / (1 - ||A||_inf): a uniform bound on the
// regular agents' estimates under bounded injected input.
inline double input_boundedness_bound(const Eigen::MatrixXd& x0, double u_star, double alpha_star, double L,
                                      const Eigen::MatrixXd& A) {
  const double a_norm = infinity_norm(A);
  if (!(a_norm < 1.0))
    throw BoundInapplicableError("||A||_inf >= 1: some regular agent puts no weight on the malicious agent");
  const double x_norm = x0.size() ? x0.cwiseAbs().maxCoeff() : 0.0;
  return x_norm + (u_star + alpha_star * L) / (1.0 - a_norm);
}

inline double max_abs_state(const VisibleTrace& t) {
  double m = 0.0;
  for (const auto& x : t.states)
    if (x.size()) m = std::max(m, x.cwiseAbs().maxCoeff());
  return m;
}

inline double max_abs_input(const VisibleTrace& t) {
  double m = 0.0;
  for (const auto& u : t.inputs)
    if (u.size()) m = std::max(m, u.cwiseAbs().maxCoeff());
  return m;
}

// Linear-interpolated quantile, q in [0, 1]; NaNs are dropped.
inline double quantile(std::vector<double> v, double q) {
  v.erase(std::remove_if(v.begin(), v.end(), [](double x) { return std::isnan(x); }), v.end());
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

inline double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

struct RunSummary {
  std::vector<double> disagreement;
  std::vector<Eigen::VectorXd> average;
  std::vector<double> gap;
  std::optional<double> boundedness_bound;
  double final_disagreement = 0.0;
  double final_gap = 0.0;
  double final_max_error = 0.0;  // max_i |x_i(K) - x*|
};

inline RunSummary summarize(const VisibleTrace& t, std::span<const ObjectiveSpec> specs,
                            const Eigen::VectorXd& optimum, double optimal_value) {
  RunSummary s;
  for (const auto& x : t.states) {
    s.disagreement.push_back(disagreement(x));
    s.average.push_back(average(x));
    s.gap.push_back(optimality_gap(x, specs, optimal_value));
  }
  s.final_disagreement = s.disagreement.back();
  s.final_gap = s.gap.back();
  const auto& last = t.states.back();
  for (Eigen::Index i = 0; i < last.rows(); ++i)
    s.final_max_error = std::max(s.final_max_error, (last.row(i).transpose() - optimum).norm());
  return s;
}

}  // namespace privsub
