#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace pwltc {

/// Parameter outside the domain where an operation is defined.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Caller broke a documented precondition of an internal routine.
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// A statement's hypotheses are not met by the supplied parameters.
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Iterative procedure failed to reach its tolerance.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double best)
        : std::runtime_error(what), best_(best) {}
    double best_iterate() const noexcept { return best_; }

private:
    double best_;
};

/// Orbit left the analysis window before reaching any target.
class WindowError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Step budget exhausted; carries whatever was computed so far.
template <class Partial>
class BudgetExceeded : public std::runtime_error {
public:
    BudgetExceeded(const std::string& what, Partial partial)
        : std::runtime_error(what), partial_(std::move(partial)) {}
    const Partial& partial() const noexcept { return partial_; }

private:
    Partial partial_;
};

class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace pwltc
