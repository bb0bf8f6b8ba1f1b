#pragma once

#include <stdexcept>
#include <string>

namespace memestat {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input is constant (or all-tied) where a statistic needs variation.
class DegenerateSeriesError : public Error {
public:
    DegenerateSeriesError() : Error("degenerate series") {}
};

/// Design matrix is rank deficient within tolerance.
class SingularMatrixError : public Error {
public:
    SingularMatrixError() : Error("singular design matrix") {}
};

/// Not enough observations for the requested operation.
class InsufficientDataError : public Error {
public:
    using Error::Error;
};

/// Argument outside the mathematical domain of a function.
class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error("domain error: " + what) {}
};

/// Malformed or invalid input file contents.
class InputError : public Error {
public:
    using Error::Error;
};

}  // namespace memestat
