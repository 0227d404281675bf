// errors.hpp - exception hierarchy shared by every module
#pragma once

#include <stdexcept>
#include <string>

namespace thermowork {

/// Base class; the CLI maps each subclass onto an exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameters, dimension mismatches, malformed configuration.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the domain of a functional (e.g. density outside [0, 2]).
class DomainError : public InputError {
 public:
  using InputError::InputError;
};

/// Problem size above a dense-storage or enumeration guard.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// Iterative solve failed to reach its tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double last_residual)
      : Error(what), last_residual_(last_residual) {}
  double last_residual() const noexcept { return last_residual_; }

 private:
  double last_residual_;
};

/// Unphysical response input: negative Casida eigenvalue, negative weight, ...
class StabilityError : public Error {
 public:
  using Error::Error;
};

/// Generic numerical failure (bracket failure, integrator drift).
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace thermowork
