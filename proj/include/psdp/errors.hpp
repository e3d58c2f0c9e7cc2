#pragma once

#include <stdexcept>
#include <string>

namespace psdp {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Violated operation precondition (dimension mismatch, negative input, ...).
class ContractViolation : public Error {
public:
    using Error::Error;
};

/// Model or file content violates a declared invariant. Carries the name of
/// the offending field so callers can point at the exact entry.
class ValidationError : public Error {
public:
    ValidationError(const std::string& field, const std::string& what)
        : Error(field + ": " + what), field_(field) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

/// A policy whose discounted dynamics matrix has spectral radius >= 1.
class InstabilityError : public Error {
public:
    InstabilityError(const std::string& what, double spectral_radius)
        : Error(what), spectral_radius_(spectral_radius) {}
    double spectral_radius() const { return spectral_radius_; }

private:
    double spectral_radius_;
};

/// Power iteration did not settle within its budget; stability is unknown.
class IndeterminateStability : public Error {
public:
    using Error::Error;
};

/// The minimization oracle failed (e.g. unbounded below).
class ModelInfeasibility : public Error {
public:
    using Error::Error;
};

/// Bad solver or schedule configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A computed quantity contradicts a structural guarantee of the problem
/// class. Signals a defective model rather than a user mistake.
class TheoryViolation : public Error {
public:
    using Error::Error;
};

/// Malformed input file. Carries a human-readable position.
class ParseError : public Error {
public:
    using Error::Error;
};

/// Requested exhaustive computation exceeds the configured budget.
class BudgetExceeded : public Error {
public:
    using Error::Error;
};

} // namespace psdp
