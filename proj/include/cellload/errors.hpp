#pragma once

#include <stdexcept>
#include <string>

namespace cellload {

/// Argument outside the mathematical domain of a function.
class DomainError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

/// Numerical integration did not reach the requested tolerance.
/// Carries the best estimate that was available when the engine gave up.
class ConvergenceError : public std::runtime_error {
  public:
    ConvergenceError(const std::string& what, double best_estimate, double error_estimate)
        : std::runtime_error(what), best_estimate_(best_estimate), error_estimate_(error_estimate) {}

    double best_estimate() const noexcept { return best_estimate_; }
    double error_estimate() const noexcept { return error_estimate_; }

  private:
    double best_estimate_;
    double error_estimate_;
};

/// A configuration value violates an invariant. `field()` names the offending
/// parameter (e.g. "sigma", "sim.window_radius").
class ValidationError : public std::invalid_argument {
  public:
    ValidationError(std::string field, const std::string& message)
        : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

  private:
    std::string field_;
};

/// Moment matching or conditioning has no solution for the given input.
class InfeasibleError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// The DFT inversion of a PGF produced an implausible distribution.
class InversionError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace cellload
