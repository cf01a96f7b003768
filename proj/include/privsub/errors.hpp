#pragma once

#include <stdexcept>
#include <string>

namespace privsub {

// Wrong shapes, out-of-range indices, malformed arguments.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A scenario or run setup that cannot be executed as given (exit code 2).
class ConfigurationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConstructionUnsupportedError : public ConfigurationError {
 public:
  using ConfigurationError::ConfigurationError;
};

class ConnectivityError : public ConfigurationError {
 public:
  using ConfigurationError::ConfigurationError;
};

class UnsupportedError : public ConfigurationError {
 public:
  using ConfigurationError::ConfigurationError;
};

class UnboundedSubgradientError : public ConfigurationError {
 public:
  using ConfigurationError::ConfigurationError;
};

// Numeric outcomes that are verdicts rather than bugs (exit code 3).
class NumericVerdict : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Data matrix of a recovery window is rank deficient.
class SingularDataError : public NumericVerdict {
 public:
  SingularDataError(const std::string& what, double conditioning)
      : NumericVerdict(what), conditioning_(conditioning) {}
  double conditioning() const { return conditioning_; }

 private:
  double conditioning_;
};

// The span is deficient but no strictly positive row of A exists to perturb.
class CertificateNotConstructibleError : public NumericVerdict {
 public:
  using NumericVerdict::NumericVerdict;
};

// ||A||_inf >= 1, so the boundedness estimate does not apply.
class BoundInapplicableError : public NumericVerdict {
 public:
  using NumericVerdict::NumericVerdict;
};

}  // namespace privsub
