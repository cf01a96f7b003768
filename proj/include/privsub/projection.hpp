#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <type_traits>
#include <utility>
#include <variant>

#include "privsub/errors.hpp"

namespace privsub {

// Bounded convex set X with a closed-form Euclidean projection.
class ProjectionSet {
 public:
  struct Box {
    Eigen::VectorXd lower, upper;
  };
  struct Ball {
    Eigen::VectorXd center;
    double radius = 0.0;
  };

  static ProjectionSet box(Eigen::VectorXd lower, Eigen::VectorXd upper) {
    if (lower.size() != upper.size() || lower.size() == 0)
      throw DomainError("box bounds must share a positive dimension");
    if ((lower.array() > upper.array()).any()) throw DomainError("box is empty (lower > upper)");
    if (!lower.allFinite() || !upper.allFinite()) throw DomainError("box must be bounded");
    return ProjectionSet(Box{std::move(lower), std::move(upper)});
  }

  static ProjectionSet interval(double lo, double hi) {
    return box(Eigen::VectorXd::Constant(1, lo), Eigen::VectorXd::Constant(1, hi));
  }

  static ProjectionSet ball(Eigen::VectorXd center, double radius) {
    if (center.size() == 0) throw DomainError("ball needs a positive dimension");
    if (!(radius >= 0.0) || !std::isfinite(radius)) throw DomainError("ball radius must be finite and >= 0");
    return ProjectionSet(Ball{std::move(center), radius});
  }

  int dimension() const {
    return static_cast<int>(std::visit(
        [](const auto& s) {
          if constexpr (std::is_same_v<std::decay_t<decltype(s)>, Box>) return s.lower.size();
          else return s.center.size();
        },
        shape_));
  }

  bool is_box() const { return std::holds_alternative<Box>(shape_); }
  const Box& as_box() const { return std::get<Box>(shape_); }
  const Ball& as_ball() const { return std::get<Ball>(shape_); }

  Eigen::VectorXd project(const Eigen::VectorXd& y) const {
    check(y);
    if (const auto* b = std::get_if<Box>(&shape_)) {
      Eigen::VectorXd out(y.size());
      for (Eigen::Index i = 0; i < y.size(); ++i) out(i) = std::clamp(y(i), b->lower(i), b->upper(i));
      return out;
    }
    const auto& ball = std::get<Ball>(shape_);
    const Eigen::VectorXd offset = y - ball.center;
    const double dist = offset.norm();
    if (dist <= ball.radius) return y;
    if (dist == 0.0) return ball.center;
    // Rounding can leave the rescaled point a hair outside; shrink until it is
    // a member so that projecting again is the identity.
    double scale = ball.radius / dist;
    Eigen::VectorXd out = ball.center + scale * offset;
    while ((out - ball.center).norm() > ball.radius) {
      scale = std::nextafter(scale, 0.0);
      out = ball.center + scale * offset;
    }
    return out;
  }

  bool contains(const Eigen::VectorXd& y) const {
    check(y);
    if (const auto* b = std::get_if<Box>(&shape_))
      return (y.array() >= b->lower.array()).all() && (y.array() <= b->upper.array()).all();
    const auto& ball = std::get<Ball>(shape_);
    return (y - ball.center).norm() <= ball.radius;
  }

  // Axis-aligned bounding box (the box itself for box sets).
  std::pair<Eigen::VectorXd, Eigen::VectorXd> bounds() const {
    if (const auto* b = std::get_if<Box>(&shape_)) return {b->lower, b->upper};
    const auto& ball = std::get<Ball>(shape_);
    return {ball.center.array() - ball.radius, ball.center.array() + ball.radius};
  }

 private:
  explicit ProjectionSet(std::variant<Box, Ball> s) : shape_(std::move(s)) {}

  void check(const Eigen::VectorXd& y) const {
    if (y.size() != dimension()) throw DomainError("point dimension does not match projection set");
  }

  std::variant<Box, Ball> shape_;
};

// Row-wise projection of an agents x m estimate matrix.
inline Eigen::MatrixXd project_rows(const ProjectionSet& set, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd out(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) out.row(i) = set.project(x.row(i).transpose()).transpose();
  return out;
}

}  // namespace privsub
