#pragma once

#include <limits>
#include <stdexcept>
#include <string>

namespace stochstab {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or non-finite input (bad grid size, NaN samples, nonpositive coefficients).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A drift that vanishes or changes sign where a nonsingular flow is required.
class NonsingularityViolation : public Error {
 public:
  using Error::Error;
};

/// Two fields that must share a grid do not.
class GridMismatch : public Error {
 public:
  using Error::Error;
};

/// Noise intensity too small for the requested grid; carries the smallest usable value.
class PrecisionExhausted : public Error {
 public:
  PrecisionExhausted(const std::string& what, double smallest_safe_eps)
      : Error(what), smallest_safe_eps_(smallest_safe_eps) {}
  double smallest_safe_eps() const noexcept { return smallest_safe_eps_; }

 private:
  double smallest_safe_eps_;
};

/// Linear solve failed, was ill-conditioned, or produced an unusable density.
class SolverFailure : public Error {
 public:
  explicit SolverFailure(const std::string& what,
                         double condition_estimate = std::numeric_limits<double>::quiet_NaN())
      : Error(what), condition_estimate_(condition_estimate) {}
  double condition_estimate() const noexcept { return condition_estimate_; }

 private:
  double condition_estimate_;
};

class InsufficientData : public Error {
 public:
  using Error::Error;
};

/// Spectral derivatives that fail an exactness check (e.g. divergence of a stream field).
class DifferentiationError : public Error {
 public:
  using Error::Error;
};

/// An operation was asked for in a regime it does not cover (e.g. unique-minimum
/// assertions on a potential with several global minima).
class ModeError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace stochstab
