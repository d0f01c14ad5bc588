#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hcomp {

// Base for every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// An argument is outside the domain of the operation (n = 0, Re s too small, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

// A size or enumeration guard tripped (l > 30, power > 16, dimension > 6, ...).
class GuardError : public Error {
public:
    using Error::Error;
};

// A Dirichlet polynomial is not compatible with a generator set.
class IncompatibleError : public Error {
public:
    IncompatibleError(const std::string& what, unsigned long long offending)
        : Error(what), offending_(offending) {}
    unsigned long long offending() const noexcept { return offending_; }

private:
    unsigned long long offending_;
};

// The symbol is not in the Gordon-Hedenmalm class; carries the computed infimum.
class MembershipError : public Error {
public:
    MembershipError(const std::string& what, double infimum)
        : Error(what), infimum_(infimum) {}
    double infimum() const noexcept { return infimum_; }

private:
    double infimum_;
};

// A symbol/kernel combination for which no closed-form adjoint image is known.
class UnsupportedError : public Error {
public:
    using Error::Error;
};

// Preconditions of an analysis procedure are not met.
class PreconditionError : public Error {
public:
    using Error::Error;
};

// A linear combination lists the same symbol twice.
class DuplicateError : public Error {
public:
    using Error::Error;
};

// Parse failure with a 1-based source position.
class ParseError : public Error {
public:
    ParseError(const std::string& message, std::size_t line, std::size_t column)
        : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
          message_(message), line_(line), column_(column) {}
    const std::string& message() const noexcept { return message_; }
    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::string message_;
    std::size_t line_;
    std::size_t column_;
};

}  // namespace hcomp
