#pragma once

#include <stdexcept>

namespace pqpcp {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree, or a dimension is degenerate.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// A documented precondition on a value was violated (e.g. weight order).
class InvariantError : public Error {
public:
    using Error::Error;
};

/// Non-finite values or a factorization that failed to converge.
class NumericError : public Error {
public:
    using Error::Error;
};

/// Malformed input file (matrix, image or config).
class ParseError : public Error {
public:
    using Error::Error;
};

} // namespace pqpcp
