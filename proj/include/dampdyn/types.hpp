#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace dampdyn {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Error hierarchy shared by every module. Each maps onto one failure class
// the CLI reports with a distinct exit code.

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Non-finite or out-of-domain argument.
struct DomainError : Error {
  using Error::Error;
};

/// Inner solve did not reach its tolerance.
struct NumericalError : Error {
  NumericalError(const std::string& what, double residual)
      : Error(what + " (residual " + std::to_string(residual) + ")"),
        residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Operation needs something the object does not provide (e.g. a Hessian).
struct CapabilityError : Error {
  using Error::Error;
};

struct NotFoundError : Error {
  using Error::Error;
};

/// Malformed input to a diagnostic (grid mismatch, wrong channel, ...).
struct InputError : Error {
  using Error::Error;
};

struct InsufficientDataError : Error {
  using Error::Error;
};

/// A parameter family or certificate precondition is violated; the message
/// names the violated inequality.
struct ConditionError : Error {
  using Error::Error;
};

/// State left the finite region; carries the time (or iteration) of blow-up.
struct DivergenceError : Error {
  explicit DivergenceError(double when)
      : Error("divergence detected at t = " + std::to_string(when)),
        when_(when) {}
  double when() const noexcept { return when_; }

 private:
  double when_;
};

inline bool all_finite(const Vec& v) { return v.allFinite(); }

}  // namespace dampdyn
