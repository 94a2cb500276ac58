#pragma once

#include <stdexcept>
#include <string>

namespace levydam {

/// Argument outside the documented domain of an operation.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Iterative procedure (root bracketing, series, refinement) did not converge.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Generic numerical failure: divergent series, infinite means where a finite
/// value is required, inversion residuals out of range.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Thrown when a regenerative quantity needs a finite mean cycle length.
class InfiniteMeanError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Monte Carlo run could not finish enough cycles inside the horizon.
class InsufficientDataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& msg, int line = -1)
        : std::runtime_error(line >= 0 ? "line " + std::to_string(line) + ": " + msg : msg),
          line_(line) {}
    int line() const noexcept { return line_; }

private:
    int line_;
};

}  // namespace levydam
