#pragma once

#include <stdexcept>
#include <string>

namespace capfield {

/// Input outside the mathematical domain of an operation (e.g. a point
/// on or outside the cap rim, a singular field location).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Invalid configuration: inadmissible field coefficients, malformed
/// tables, bad CLI arguments.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure failed to reach its tolerance. Carries the best
/// estimate and its error bound so callers can decide what to do with it.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double best_estimate,
                   double error_bound)
      : std::runtime_error(what),
        best_estimate_(best_estimate),
        error_bound_(error_bound) {}

  double best_estimate() const noexcept { return best_estimate_; }
  double error_bound() const noexcept { return error_bound_; }

 private:
  double best_estimate_;
  double error_bound_;
};

/// Golden-section search met three samples whose middle value exceeds
/// both neighbours' minimum in a way no unimodal function allows.
class NonUnimodalError : public std::runtime_error {
 public:
  NonUnimodalError(const std::string& what, double left, double right)
      : std::runtime_error(what), left_(left), right_(right) {}

  /// Angles bracketing the second local minimum that was found.
  double left() const noexcept { return left_; }
  double right() const noexcept { return right_; }

 private:
  double left_;
  double right_;
};

}  // namespace capfield
