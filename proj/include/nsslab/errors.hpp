#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nsslab {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// An iterative routine ran out of its iteration budget.
class NonConvergence : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Components of a system (or a state) disagree on dimensions.
class DimensionMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The integrator produced a NaN/Inf state.
class NonFiniteState : public std::runtime_error {
public:
    NonFiniteState(std::size_t step, double time)
        : std::runtime_error("non-finite state at step " + std::to_string(step) +
                             " (t=" + std::to_string(time) + ")"),
          step_(step), time_(time) {}

    std::size_t step() const noexcept { return step_; }
    double time() const noexcept { return time_; }

private:
    std::size_t step_;
    double time_;
};

/// A pathwise coupling inequality failed at some index.
class CouplingViolation : public std::runtime_error {
public:
    CouplingViolation(std::size_t index, double x, double z)
        : std::runtime_error("coupling violated at index " + std::to_string(index) +
                             ": x=" + std::to_string(x) + ", z=" + std::to_string(z)),
          index_(index) {}

    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

}  // namespace nsslab
