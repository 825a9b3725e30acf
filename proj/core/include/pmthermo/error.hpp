#pragma once

#include <stdexcept>
#include <string>

namespace pmthermo {

// Exception hierarchy. The CLI maps each family onto an exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed, incomplete or unknown configuration entries.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A convergence gate (truncation, tolerance, grid refinement) was not met.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Integrator, quadrature or state-validity failure during a computation.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace pmthermo
