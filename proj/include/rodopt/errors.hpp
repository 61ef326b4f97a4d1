#pragma once

#include <stdexcept>
#include <string>

namespace rodopt {

/// Invalid configuration or parameters (radius, preset keys, m1 out of range, ...).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Caller violated a precondition (bad index, wrong field length, stale state).
class UsageError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// A coefficient left its admissible range, e.g. a non-positive stiffness weight.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Iterative solver failed to reach its tolerance.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, double residual, std::size_t iterations)
        : std::runtime_error(what), residual_(residual), iterations_(iterations) {}

    double residual() const noexcept { return residual_; }
    std::size_t iterations() const noexcept { return iterations_; }

private:
    double residual_;
    std::size_t iterations_;
};

/// NaN/Inf detected in a state vector.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace rodopt
