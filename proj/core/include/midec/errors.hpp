#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace midec {

// Base class for everything this library throws on contract violations.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent session directory contents. The message names
// the offending file and field.
struct SessionFormatError : Error {
  using Error::Error;
};

// Shape/argument mismatches (channel counts, cutoff vs Nyquist, ...).
struct InvalidArgumentError : Error {
  using Error::Error;
};

// Numerical failure: rank-deficient regressors, non-SPD matrices, ...
struct NumericalError : Error {
  using Error::Error;
};

// Iterative solver did not converge; carries the last iterate so callers
// can inspect how bad it was.
struct ConvergenceError : Error {
  ConvergenceError(const std::string& msg, Eigen::MatrixXd iterate, double res)
      : Error(msg), last_iterate(std::move(iterate)), residual(res) {}

  Eigen::MatrixXd last_iterate;
  double residual{0.0};
};

}  // namespace midec
