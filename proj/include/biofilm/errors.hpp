#pragma once

#include <stdexcept>
#include <string>

namespace biofilm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A parameter or argument is outside its admissible range (or not finite).
class InvalidInput : public Error {
public:
  using Error::Error;
};

/// An iterative solver did not reach its tolerance.
class IterationFailure : public Error {
public:
  IterationFailure(const std::string &what, double last_residual, int iterations)
      : Error(what), last_residual_(last_residual), iterations_(iterations) {}

  double last_residual() const noexcept { return last_residual_; }
  int iterations() const noexcept { return iterations_; }

private:
  double last_residual_;
  int iterations_;
};

/// The operation is not defined for this parameter regime
/// (e.g. the equilibrium machinery when r(c*) <= b).
class DomainError : public Error {
public:
  using Error::Error;
};

/// A quantity that the continuous problem keeps bounded escaped its bounds.
class InvariantViolation : public Error {
public:
  using Error::Error;
};

} // namespace biofilm
