#ifndef TSHUNT_ERRORS_HPP
#define TSHUNT_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tshunt {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad inputs: parameters out of range, malformed files, wrong element kinds.
class InputError : public Error {
public:
    using Error::Error;
};

/// Failures of the numerics themselves (ill-conditioning, divergence).
class NumericalError : public Error {
public:
    using Error::Error;
};

class SingularMatrix : public NumericalError {
public:
    explicit SingularMatrix(double rcond)
        : NumericalError("singular matrix (rcond = " + std::to_string(rcond) + ")"), rcond_(rcond) {}
    double rcond() const noexcept { return rcond_; }

private:
    double rcond_;
};

class NonFinite : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class DegenerateModes : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class SingularSystem : public NumericalError {
public:
    SingularSystem(const std::string& what, double x_f_m)
        : NumericalError(what + " at x_f = " + std::to_string(x_f_m) + " m"), x_f_m_(x_f_m) {}
    double x_f_m() const noexcept { return x_f_m_; }

private:
    double x_f_m_;
};

class FitDiverged : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class DegenerateVariance : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class EmptyAfterExclusion : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class NonPositive : public InputError {
public:
    using InputError::InputError;
};

class NonPositiveBallast : public NonPositive {
public:
    using NonPositive::NonPositive;
};

class ZeroImpedance : public InputError {
public:
    using InputError::InputError;
};

class WrongKind : public InputError {
public:
    using InputError::InputError;
};

class OutOfSection : public InputError {
public:
    using InputError::InputError;
};

class NoShuntingPoint : public InputError {
public:
    using InputError::InputError;
};

class TraceFormat : public InputError {
public:
    TraceFormat(const std::string& what, std::size_t line)
        : InputError("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class ConfigError : public InputError {
public:
    using InputError::InputError;
};

}  // namespace tshunt

#endif  // TSHUNT_ERRORS_HPP
