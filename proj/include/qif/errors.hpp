#pragma once

#include <stdexcept>
#include <string>

namespace qif {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid inputs: out-of-range parameters, non-Hermitian Hamiltonians,
/// malformed configurations.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A closed form was asked for outside the regime it was derived in.
class RegimeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Numerical failure of a well-posed request.
class SolverError : public Error {
 public:
  using Error::Error;
};

/// The trace-constrained stationary system is singular.
class NonUniqueSteadyState : public SolverError {
 public:
  using SolverError::SolverError;
};

class IntegrationFailure : public SolverError {
 public:
  IntegrationFailure(const std::string& what, double time)
      : SolverError(what + " (t = " + std::to_string(time) + ")"), time_(time) {}

  double time() const noexcept { return time_; }

 private:
  double time_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ParseError : public IoError {
 public:
  ParseError(const std::string& what, std::size_t line)
      : IoError("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace qif
