#pragma once

#include <stdexcept>
#include <string>

namespace krein {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation (x <= 0, k < 1, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Invalid model parameters (admissibility ranges, malformed tables).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Operation precondition not met (e.g. order d below d(m)).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A quantity that should be finite was detected to diverge.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// Refinement or iteration failed to stabilise inside its budget.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Numerical evidence neither confirms convergence nor divergence.
class IndeterminateError : public Error {
 public:
  IndeterminateError(const std::string& what, double lower, double upper)
      : Error(what), lower_(lower), upper_(upper) {}
  double lower() const noexcept { return lower_; }
  double upper() const noexcept { return upper_; }

 private:
  double lower_;
  double upper_;
};

/// A constructed object failed its own verification grid.
class VerificationError : public Error {
 public:
  using Error::Error;
};

/// No simulation scheme fits the given string.
class SchemeUnavailableError : public Error {
 public:
  using Error::Error;
};

/// Simulation or iteration exceeded its step/time budget.
class BudgetError : public Error {
 public:
  using Error::Error;
};

}  // namespace krein
