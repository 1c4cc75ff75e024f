#pragma once

#include <stdexcept>
#include <string>

namespace rbto {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or argument outside a documented precondition.
struct ConfigError : Error {
  using Error::Error;
};

/// Input outside the support of a distribution (e.g. a nonpositive lognormal value).
struct DomainError : Error {
  using Error::Error;
};

/// Non-finite state, overflow, or a failed factorization.
struct NumericalError : Error {
  using Error::Error;
};

/// Least-squares fit on a rank-deficient design matrix.
struct FitError : NumericalError {
  FitError(const std::string& what, double condition)
      : NumericalError(what), condition_estimate(condition) {}
  double condition_estimate;
};

/// Sparse factorization hit a zero or negative pivot.
struct SolverError : NumericalError {
  SolverError(const std::string& what, double pivot)
      : NumericalError(what), smallest_pivot(pivot) {}
  double smallest_pivot;
};

}  // namespace rbto
