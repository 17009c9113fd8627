#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace rbec {

/// Base class for failures of numerical algorithms (as opposed to invalid
/// arguments, which raise std::invalid_argument).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An iteration ran out of its budget. Carries the last attained residual.
class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& what, double residual, int iterations)
      : NumericalError(what), residual_(residual), iterations_(iterations) {}

  double residual() const { return residual_; }
  int iterations() const { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

/// Conjugate gradients met nonpositive curvature: the operator is not HPD.
class BreakdownError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Eigensolver budget exhausted; residuals of all requested pairs attached.
class EigenConvergenceError : public NumericalError {
 public:
  EigenConvergenceError(const std::string& what, std::vector<double> residuals)
      : NumericalError(what), residuals_(std::move(residuals)) {}

  const std::vector<double>& residuals() const { return residuals_; }

 private:
  std::vector<double> residuals_;
};

/// Input data is inconsistent with what the caller expects (dump header or
/// length does not match the configured space).
class DataMismatchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rbec
