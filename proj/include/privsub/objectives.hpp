#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "privsub/errors.hpp"
#include "privsub/projection.hpp"

namespace privsub {

enum class ObjectiveKind { AbsoluteDeviation, Quadratic, Constant };

inline const char* to_string(ObjectiveKind k) {
  switch (k) {
    case ObjectiveKind::AbsoluteDeviation: return "absolute-deviation";
    case ObjectiveKind::Quadratic: return "quadratic";
    case ObjectiveKind::Constant: return "constant";
  }
  return "unknown";
}

// Convex per-agent objective on R^m:
//   absolute-deviation  scale * sum_j |x_j - c_j|
//   quadratic           sum_j q_j (x_j - c_j)^2      (Q = diag(q), q >= 0)
//   constant            value
struct ObjectiveSpec {
  ObjectiveKind kind = ObjectiveKind::Constant;
  Eigen::VectorXd center;
  double scale = 1.0;
  Eigen::VectorXd curvature;
  double value = 0.0;

  static ObjectiveSpec absolute_deviation(Eigen::VectorXd center, double scale = 1.0) {
    if (scale < 0.0) throw DomainError("absolute-deviation scale must be >= 0");
    ObjectiveSpec s;
    s.kind = ObjectiveKind::AbsoluteDeviation;
    s.center = std::move(center);
    s.scale = scale;
    return s;
  }

  static ObjectiveSpec quadratic(Eigen::VectorXd center, Eigen::VectorXd curvature) {
    if (center.size() != curvature.size()) throw DomainError("curvature must match center dimension");
    if ((curvature.array() < 0.0).any()) throw DomainError("quadratic curvature must be >= 0");
    ObjectiveSpec s;
    s.kind = ObjectiveKind::Quadratic;
    s.center = std::move(center);
    s.curvature = std::move(curvature);
    return s;
  }

  static ObjectiveSpec quadratic(Eigen::VectorXd center) {
    Eigen::VectorXd q = Eigen::VectorXd::Ones(center.size());
    return quadratic(std::move(center), std::move(q));
  }

  static ObjectiveSpec constant(double value, int dimension) {
    ObjectiveSpec s;
    s.kind = ObjectiveKind::Constant;
    s.center = Eigen::VectorXd::Zero(dimension);
    s.value = value;
    return s;
  }

  int dimension() const { return static_cast<int>(center.size()); }
};

inline void check_dimension(const ObjectiveSpec& spec, const Eigen::VectorXd& x) {
  if (x.size() != spec.dimension())
    throw DomainError("point has dimension " + std::to_string(x.size()) + ", objective expects " +
                      std::to_string(spec.dimension()));
}

inline double evaluate(const ObjectiveSpec& spec, const Eigen::VectorXd& x) {
  check_dimension(spec, x);
  switch (spec.kind) {
    case ObjectiveKind::AbsoluteDeviation: return spec.scale * (x - spec.center).cwiseAbs().sum();
    case ObjectiveKind::Quadratic:
      return (spec.curvature.array() * (x - spec.center).array().square()).sum();
    case ObjectiveKind::Constant: return spec.value;
  }
  return 0.0;
}

// Deterministic element of the subdifferential; 0 on a kinked coordinate.
inline Eigen::VectorXd subgradient(const ObjectiveSpec& spec, const Eigen::VectorXd& x) {
  check_dimension(spec, x);
  switch (spec.kind) {
    case ObjectiveKind::AbsoluteDeviation: {
      Eigen::VectorXd d(x.size());
      for (Eigen::Index j = 0; j < x.size(); ++j) {
        const double diff = x(j) - spec.center(j);
        d(j) = diff > 0.0 ? spec.scale : (diff < 0.0 ? -spec.scale : 0.0);
      }
      return d;
    }
    case ObjectiveKind::Quadratic:
      return 2.0 * (spec.curvature.array() * (x - spec.center).array()).matrix();
    case ObjectiveKind::Constant: return Eigen::VectorXd::Zero(x.size());
  }
  return Eigen::VectorXd::Zero(x.size());
}

// Euclidean bound on subgradients over X (over all of R^m when X is absent).
inline double subgradient_bound(const ObjectiveSpec& spec, const std::optional<ProjectionSet>& set) {
  switch (spec.kind) {
    case ObjectiveKind::AbsoluteDeviation: return spec.scale * std::sqrt(double(spec.dimension()));
    case ObjectiveKind::Constant: return 0.0;
    case ObjectiveKind::Quadratic: break;
  }
  if ((spec.curvature.array() == 0.0).all()) return 0.0;
  if (!set) throw UnboundedSubgradientError("quadratic objective has unbounded subgradients on R^m");
  if (set->dimension() != spec.dimension()) throw DomainError("projection set dimension mismatch");
  if (set->is_box()) {
    const auto& b = set->as_box();
    Eigen::VectorXd worst(spec.dimension());
    for (int j = 0; j < spec.dimension(); ++j) {
      const double reach = std::max(std::abs(b.lower(j) - spec.center(j)), std::abs(b.upper(j) - spec.center(j)));
      worst(j) = 2.0 * spec.curvature(j) * reach;
    }
    return worst.norm();
  }
  const auto& ball = set->as_ball();
  return 2.0 * spec.curvature.maxCoeff() * ((ball.center - spec.center).norm() + ball.radius);
}

inline double subgradient_bound(std::span<const ObjectiveSpec> specs, const std::optional<ProjectionSet>& set) {
  double l = 0.0;
  for (const auto& s : specs) l = std::max(l, subgradient_bound(s, set));
  return l;
}

inline double total_objective(std::span<const ObjectiveSpec> specs, const Eigen::VectorXd& x) {
  double f = 0.0;
  for (const auto& s : specs) f += evaluate(s, x);
  return f;
}

struct Minimizer {
  Eigen::VectorXd point;
  double value = 0.0;
};

namespace detail {

inline double weighted_median(std::vector<std::pair<double, double>> pts) {
  std::sort(pts.begin(), pts.end());
  double total = 0.0;
  for (const auto& p : pts) total += p.second;
  if (total == 0.0) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    acc += pts[i].second;
    if (acc > 0.5 * total) return pts[i].first;
    if (acc == 0.5 * total) {
      // Flat stretch [c_i, c_{i+1}]: take its midpoint.
      std::size_t j = i + 1;
      while (j < pts.size() && pts[j].second == 0.0) ++j;
      return j < pts.size() ? 0.5 * (pts[i].first + pts[j].first) : pts[i].first;
    }
  }
  return pts.back().first;
}

// Nested grid search over the bounding box of X: a coarse pass followed by
// zoomed passes around the incumbent until the spacing is at most
// 1e-4 * width, then one more refinement pass.
inline Eigen::VectorXd grid_minimize(const std::function<double(const Eigen::VectorXd&)>& f,
                                     const ProjectionSet& set) {
  const int m = set.dimension();
  auto [lo, hi] = set.bounds();
  const Eigen::VectorXd width = hi - lo;
  const int per_axis = m == 1 ? 10000 : 200;
  const double target = 1e-4;
  Eigen::VectorXd best = set.project(0.5 * (lo + hi));
  double best_f = f(best);
  Eigen::VectorXd cur_lo = lo, cur_hi = hi;
  double spacing = 1.0;  // relative to width
  bool refined_past_target = false;
  while (true) {
    Eigen::VectorXd step = (cur_hi - cur_lo) / per_axis;
    std::vector<int> idx(m, 0);
    while (true) {
      Eigen::VectorXd p(m);
      for (int j = 0; j < m; ++j) p(j) = cur_lo(j) + idx[j] * step(j);
      p = set.project(p);
      const double v = f(p);
      if (v < best_f) {
        best_f = v;
        best = p;
      }
      int j = 0;
      while (j < m && ++idx[j] > per_axis) idx[j++] = 0;
      if (j == m) break;
    }
    spacing = step.maxCoeff() / std::max(width.maxCoeff(), std::numeric_limits<double>::min());
    if (width.maxCoeff() == 0.0 || refined_past_target) break;
    if (spacing <= target) refined_past_target = true;
    cur_lo = (best - step).cwiseMax(lo);
    cur_hi = (best + step).cwiseMin(hi);
  }
  return best;
}

}  // namespace detail

// Minimizer of sum_i f_i over X (over R^m when X is absent). Exact for
// separable families: quadratics (curvature-weighted mean) and absolute
// deviations (weighted coordinatewise median), clamped into a box X. Mixtures
// and ball-constrained cases fall back to a grid search, which needs a
// bounded X and m <= 2.
inline Minimizer sum_minimizer(std::span<const ObjectiveSpec> specs, const std::optional<ProjectionSet>& set) {
  if (specs.empty()) throw DomainError("need at least one objective");
  const int m = specs.front().dimension();
  for (const auto& s : specs)
    if (s.dimension() != m) throw DomainError("objectives disagree on dimension");
  if (set && set->dimension() != m) throw DomainError("projection set dimension mismatch");

  bool any_abs = false, any_quad = false;
  for (const auto& s : specs) {
    any_abs |= s.kind == ObjectiveKind::AbsoluteDeviation;
    any_quad |= s.kind == ObjectiveKind::Quadratic;
  }
  const auto finish = [&](Eigen::VectorXd x) {
    return Minimizer{x, total_objective(specs, x)};
  };

  const bool exact_clamp_ok = !set || set->is_box();
  if (!(any_abs && any_quad)) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(m);
    for (int j = 0; j < m; ++j) {
      if (any_abs) {
        std::vector<std::pair<double, double>> pts;
        for (const auto& s : specs)
          if (s.kind == ObjectiveKind::AbsoluteDeviation) pts.emplace_back(s.center(j), s.scale);
        x(j) = detail::weighted_median(std::move(pts));
      } else if (any_quad) {
        double num = 0.0, den = 0.0;
        for (const auto& s : specs) {
          if (s.kind != ObjectiveKind::Quadratic) continue;
          num += s.curvature(j) * s.center(j);
          den += s.curvature(j);
        }
        x(j) = den > 0.0 ? num / den : 0.0;
      }
    }
    if (!set) return finish(x);
    if (exact_clamp_ok || set->contains(x) || !(any_abs || any_quad)) return finish(set->project(x));
  }

  if (!set || m > 2)
    throw UnsupportedError("no exact minimizer for this objective mixture and grid search needs a bounded set with m <= 2");
  return finish(detail::grid_minimize([&](const Eigen::VectorXd& p) { return total_objective(specs, p); }, *set));
}

}  // namespace privsub
