// Error taxonomy for the kappa-LYZ flow library. Every throwing precondition in
// the public API maps to one of these types so callers (CLI, tests) can react
// to the specific failure class.
#pragma once

#include <stdexcept>
#include <string>

namespace lyz {

// Base class for all library failures.
struct FlowError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Two fields on incompatible grids were combined.
struct ShapeMismatchError : FlowError {
  using FlowError::FlowError;
};

// A field value or functional came out non-finite.
struct NonFiniteError : FlowError {
  using FlowError::FlowError;
};

// Poisson right-hand side has a non-negligible mean on the torus.
struct NonZeroMeanError : FlowError {
  using FlowError::FlowError;
};

// Metric lost positivity (smallest eigenvalue of the normalized metric matrix
// dropped to <= 1e-8 somewhere on the grid).
struct MetricDegenerateError : FlowError {
  explicit MetricDegenerateError(const std::string& msg, double when = 0.0)
      : FlowError(msg), time(when) {}
  double time;
};

// tau must be strictly positive for entropy-type functionals.
struct NonPositiveTauError : FlowError {
  using FlowError::FlowError;
};

// The combined heat quantity R + tau/(kappa-1) is undefined at kappa = 1.
struct KappaOneError : FlowError {
  using FlowError::FlowError;
};

// The comparison ODE needs kappa > 1 (and kappa > 0 generally).
struct KappaRangeError : FlowError {
  using FlowError::FlowError;
};

// The enhanced entropy dissipation identity only holds at kappa = 1.
struct KappaNotOneError : FlowError {
  using FlowError::FlowError;
};

// Initial (1,1)-form class does not satisfy lambda*[omega0] + [alpha0] = 0.
struct CohomologyMismatchError : FlowError {
  using FlowError::FlowError;
};

// Requested time step exceeds the stability bound for the chosen scheme.
struct CflViolationError : FlowError {
  explicit CflViolationError(const std::string& msg, double limit = 0.0)
      : FlowError(msg), dt_limit(limit) {}
  double dt_limit;
};

// Config file could not be parsed; line is 1-based, 0 if not line-specific.
struct ConfigError : FlowError {
  explicit ConfigError(const std::string& msg, int where = 0)
      : FlowError(msg), line(where) {}
  int line;
};

}  // namespace lyz
