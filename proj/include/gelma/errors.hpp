#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gelma {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Invalid argument or a violated operation precondition (step size, rank, ...).
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// A step-size precondition failed. Carries the operator norm estimate used.
class StepSizeError : public PreconditionError {
public:
    StepSizeError(const std::string& what, double norm_estimate)
        : PreconditionError(what), norm_estimate_(norm_estimate) {}

    double norm_estimate() const noexcept { return norm_estimate_; }

private:
    double norm_estimate_;
};

/// An iterate or state became non-finite.
class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, std::size_t last_finite_iteration)
        : Error(what), last_finite_(last_finite_iteration) {}

    std::size_t last_finite_iteration() const noexcept { return last_finite_; }

private:
    std::size_t last_finite_;
};

/// An iterative procedure ran out of iterations before meeting its tolerance.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double last_estimate, double residual)
        : Error(what), last_estimate_(last_estimate), residual_(residual) {}

    double last_estimate() const noexcept { return last_estimate_; }
    double residual() const noexcept { return residual_; }

private:
    double last_estimate_;
    double residual_;
};

/// Work limit of an enumeration exceeded.
class BudgetError : public Error {
public:
    using Error::Error;
};

/// No candidate satisfied the constraints.
class InfeasibleError : public Error {
public:
    using Error::Error;
};

/// File or format problem.
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace gelma
