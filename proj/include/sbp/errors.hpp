#pragma once

#include <stdexcept>
#include <string>

namespace sbp {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& msg) : Error(msg) {}
};

/// Grid construction or resolution failure.
class GridError : public Error {
 public:
  explicit GridError(const std::string& msg) : Error(msg) {}
};

/// A RadialFunction failed the H1-admissibility boundary decay check.
class AdmissibilityError : public Error {
 public:
  explicit AdmissibilityError(const std::string& msg) : Error(msg) {}
};

/// Numerical failure (overflow, linear solve breakdown, bracket failure).
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& msg) : Error(msg) {}
};

/// Rescaled profile pushed non-negligible mass outside the grid.
class TruncationError : public Error {
 public:
  explicit TruncationError(const std::string& msg) : Error(msg) {}
};

/// Configuration parse/validation error; names the offending key.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

}  // namespace sbp
