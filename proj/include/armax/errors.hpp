#pragma once

#include <stdexcept>
#include <string>

namespace armax {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Model parameters are nonfinite or structurally inconsistent.
class InvalidModelError : public Error {
 public:
  using Error::Error;
};

/// Polynomial degrees or matrix shapes violate a precondition.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A Gram/normal-equation matrix is numerically singular; the data does
/// not excite the system enough for the requested estimate.
class ExcitationError : public Error {
 public:
  using Error::Error;
};

/// A fixed-point solver did not meet its tolerance within the budget.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_ = 0.0;
};

/// A recursive update hit a degenerate pivot and was rejected.
class DegeneracyError : public Error {
 public:
  using Error::Error;
};

/// A stated precondition (e.g. polynomial stability) does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Malformed file or configuration input.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace armax
