#pragma once

#include <stdexcept>
#include <string>

namespace lamelab {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Inputs violate a documented precondition (grid mismatch, bad parameter).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A numerical procedure failed (solver non-convergence, NaN, overflow).
class NumericalError : public Error {
public:
    using Error::Error;
};

/// File-system or serialization failure.
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace lamelab
