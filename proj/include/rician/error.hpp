#pragma once

#include <stdexcept>
#include <string>

namespace rician {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical procedure (quadrature, optimizer) did not reach its tolerance.
class NumericalFailure : public std::runtime_error {
public:
    NumericalFailure(const std::string& what, double achieved_error)
        : std::runtime_error(what), achieved_error_(achieved_error) {}

    double achieved_error() const noexcept { return achieved_error_; }

private:
    double achieved_error_;
};

/// No input distribution on the requested support satisfies the constraints.
class InfeasibleError : public std::runtime_error {
public:
    InfeasibleError(const std::string& what, std::string constraint)
        : std::runtime_error(what), constraint_(std::move(constraint)) {}

    const std::string& constraint() const noexcept { return constraint_; }

private:
    std::string constraint_;
};

}  // namespace rician
