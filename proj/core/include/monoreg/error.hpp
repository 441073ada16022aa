#pragma once

#include <stdexcept>
#include <string>

namespace monoreg {

/// Input outside the mathematical domain of an operation (e.g. x not in [0,1]^d, sigma <= 0).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Inconsistent or incomplete configuration (shape mismatch, missing sigma source, bad rule).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed input file. `line()` is 1-based, 0 when not tied to a line.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : std::runtime_error(what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Brute-force oracle refused an instance that is too large to enumerate.
class GuardError : public std::length_error {
public:
    using std::length_error::length_error;
};

/// The M_n calibration regression has no usable variation.
class CalibrationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace monoreg
