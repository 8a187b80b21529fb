#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace shewhart {

// Base of every error raised by the toolkit. Preconditions on plain arguments
// (negative sizes, out-of-range probabilities) throw std::invalid_argument.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NonMonotoneModel : public Error {
public:
    using Error::Error;
};

class BracketNotFound : public Error {
public:
    using Error::Error;
};

class QuadratureFailure : public Error {
public:
    using Error::Error;
};

class InfeasibleAlpha : public Error {
public:
    using Error::Error;
};

class ModelContractViolation : public Error {
public:
    using Error::Error;
};

class Rho1Violation : public Error {
public:
    using Error::Error;
};

class NoSolution : public Error {
public:
    using Error::Error;
};

class CaseConflict : public Error {
public:
    using Error::Error;
};

class SteppedAfterStop : public Error {
public:
    using Error::Error;
};

class ZeroSurvival : public Error {
public:
    using Error::Error;
};

class InsufficientSurvivors : public Error {
public:
    InsufficientSurvivors(std::int64_t t, std::int64_t survivors)
        : Error("only " + std::to_string(survivors) + " paths survived conditioning at t=" +
                std::to_string(t)),
          t_(t), survivors_(survivors) {}
    std::int64_t t() const noexcept { return t_; }
    std::int64_t survivors() const noexcept { return survivors_; }

private:
    std::int64_t t_;
    std::int64_t survivors_;
};

class OracleMismatch : public Error {
public:
    OracleMismatch(std::string check, double residual, double tolerance)
        : Error("oracle check '" + check + "' failed: residual " + std::to_string(residual) +
                " exceeds " + std::to_string(tolerance)),
          check_(std::move(check)), residual_(residual), tolerance_(tolerance) {}
    const std::string& check() const noexcept { return check_; }
    double residual() const noexcept { return residual_; }
    double tolerance() const noexcept { return tolerance_; }

private:
    std::string check_;
    double residual_;
    double tolerance_;
};

class DominanceViolation : public Error {
public:
    DominanceViolation(std::string rule, std::int64_t t, double measure, double bound)
        : Error("competitor '" + rule + "' beats the Shewhart rule at t=" + std::to_string(t) +
                " (" + std::to_string(measure) + " > " + std::to_string(bound) + ")"),
          rule_(std::move(rule)), t_(t) {}
    const std::string& rule() const noexcept { return rule_; }
    std::int64_t t() const noexcept { return t_; }

private:
    std::string rule_;
    std::int64_t t_;
};

class UnknownExample : public Error {
public:
    using Error::Error;
};

// Job files that fail schema validation.
class InvalidJob : public Error {
public:
    using Error::Error;
};

}  // namespace shewhart
