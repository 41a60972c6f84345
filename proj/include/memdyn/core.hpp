#pragma once

// Shared numeric types and the error hierarchy used across memdyn.

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace memdyn {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter or input violates a documented precondition.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// An argument (time, position, delay offset) lies outside the covered range.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values appeared while evaluating a right-hand side or observable.
class IntegrationError : public Error {
 public:
  IntegrationError(const std::string& what, double time)
      : Error(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// The state norm crossed the blowup threshold: the solution left every
/// bounded set in finite time on this grid.
class BlowupError : public IntegrationError {
 public:
  using IntegrationError::IntegrationError;
};

}  // namespace memdyn
