#pragma once

#include <stdexcept>
#include <string>

namespace mlac {

/// Base of every error the library raises. The CLI maps each subclass to a
/// distinct process exit code (see `exit_code`).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const noexcept { return 4; }
};

/// A precondition on an input value was violated (epsilon range, m < 2, ...).
class DomainError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 1; }
};

/// Curvature or weight sampled non-positive.
class PositivityError : public DomainError {
 public:
  PositivityError(const std::string& what, double where)
      : DomainError(what), y_(where) {}
  double y() const noexcept { return y_; }

 private:
  double y_;
};

class GridMismatchError : public DomainError {
 public:
  using DomainError::DomainError;
};

class ConfigError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 1; }
};

/// The linearized Toda operator (or the Jacobi operator) is too close to
/// singular to be inverted.
class ResonanceError : public Error {
 public:
  ResonanceError(const std::string& what, double smallest_singular_value)
      : Error(what), smallest_(smallest_singular_value) {}
  int exit_code() const noexcept override { return 2; }
  double smallest_singular_value() const noexcept { return smallest_; }

 private:
  double smallest_;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, int iterations, double residual)
      : Error(what), iterations_(iterations), residual_(residual) {}
  int exit_code() const noexcept override { return 3; }
  int iterations() const noexcept { return iterations_; }
  double residual() const noexcept { return residual_; }

 private:
  int iterations_;
  double residual_;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace mlac
