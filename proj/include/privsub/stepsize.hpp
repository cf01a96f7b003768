#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "privsub/errors.hpp"

namespace privsub {

// alpha_k for the synchronous algorithm, bounded above by cap().
class StepsizeSchedule {
 public:
  enum class Kind { Constant, Harmonic, Explicit };

  static StepsizeSchedule constant(double alpha) {
    if (!(alpha > 0.0)) throw DomainError("stepsize must be positive");
    return StepsizeSchedule(Kind::Constant, alpha, {});
  }

  // alpha0 / (k + 1)
  static StepsizeSchedule harmonic(double alpha0 = 1.0) {
    if (!(alpha0 > 0.0)) throw DomainError("stepsize must be positive");
    return StepsizeSchedule(Kind::Harmonic, alpha0, {});
  }

  static StepsizeSchedule sequence(std::vector<double> values) {
    if (values.empty()) throw DomainError("explicit stepsize sequence is empty");
    for (double v : values)
      if (!(v > 0.0)) throw DomainError("stepsize must be positive");
    const double cap = *std::max_element(values.begin(), values.end());
    return StepsizeSchedule(Kind::Explicit, cap, std::move(values));
  }

  Kind kind() const { return kind_; }
  // alpha for constant, alpha0 for harmonic, the maximum for explicit.
  double base() const { return base_; }
  const std::vector<double>& values() const { return values_; }

  double at(long k) const {
    switch (kind_) {
      case Kind::Constant: return base_;
      case Kind::Harmonic: return base_ / (static_cast<double>(k) + 1.0);
      case Kind::Explicit:
        if (k < 0 || k >= static_cast<long>(values_.size()))
          throw ConfigurationError("explicit stepsize sequence has no value for k=" + std::to_string(k));
        return values_[static_cast<std::size_t>(k)];
    }
    return base_;
  }

  double cap() const { return base_; }

 private:
  StepsizeSchedule(Kind k, double base, std::vector<double> v) : kind_(k), base_(base), values_(std::move(v)) {}

  Kind kind_;
  double base_;
  std::vector<double> values_;
};

}  // namespace privsub
