#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace polystab {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A documented precondition (step-size bound, theorem hypothesis) is violated.
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The implicit solver could not meet its residual tolerance.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, std::vector<double> best_x, double best_residual)
        : std::runtime_error(what), best_x_(std::move(best_x)), best_residual_(best_residual) {}

    const std::vector<double>& best_x() const noexcept { return best_x_; }
    double best_residual() const noexcept { return best_residual_; }

private:
    std::vector<double> best_x_;
    double best_residual_;
};

/// A drift or diffusion evaluation produced a non-finite value during a step.
class StepError : public std::runtime_error {
public:
    StepError(const std::string& what, std::vector<double> state, std::int64_t step)
        : std::runtime_error(what), state_(std::move(state)), step_(step) {}

    const std::vector<double>& state() const noexcept { return state_; }
    std::int64_t step() const noexcept { return step_; }

private:
    std::vector<double> state_;
    std::int64_t step_;
};

/// Decay-exponent estimation could not run on the supplied series.
class EstimationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Too many failed paths in an ensemble.
class EnsembleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file; `line()` is 1-based, 0 when not line-specific.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace polystab
