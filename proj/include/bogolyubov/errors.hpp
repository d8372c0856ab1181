// Error taxonomy shared by every module.
//
// Validation problems derive from std::invalid_argument, numerical failures
// from std::runtime_error. The CLI maps the two families onto exit codes 2
// and 3.
#pragma once

#include <stdexcept>
#include <string>

namespace bogolyubov {

class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

/// A scenario or config file violates a declared invariant.
class ValidationError : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

/// Declared M/L certificate violated by a sampled witness.
class CertificateViolation : public ValidationError {
public:
    CertificateViolation(const std::string& what, double t, double ratio)
        : ValidationError(what), t_(t), ratio_(ratio) {}
    double witness_time() const noexcept { return t_; }
    double ratio() const noexcept { return ratio_; }

private:
    double t_;
    double ratio_;
};

/// Contraction inequality fails, so uniqueness of the bounded solution is not
/// guaranteed and simulation is refused.
class ContractionRefused : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class StepSizeError : public NumericError {
public:
    using NumericError::NumericError;
};

class DivergenceError : public NumericError {
public:
    DivergenceError(const std::string& what, std::size_t path, double t)
        : NumericError(what), path_(path), t_(t) {}
    std::size_t path() const noexcept { return path_; }
    double time() const noexcept { return t_; }

private:
    std::size_t path_;
    double t_;
};

class NotUniformlyStable : public NumericError {
public:
    using NumericError::NumericError;
};

}  // namespace bogolyubov
