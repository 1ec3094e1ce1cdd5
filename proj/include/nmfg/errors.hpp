#pragma once

#include <memory>
#include <stdexcept>
#include <string>

namespace nmfg {

/// Base class for all solver errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A caller passed an argument that violates a documented precondition.
class InvalidParameterError : public Error {
public:
    using Error::Error;
};

/// A non-finite value appeared during evaluation; the message names the
/// offending row block or vehicle.
class NumericalOverflowError : public Error {
public:
    using Error::Error;
};

/// The LU factorization of the preconditioner matrix hit a zero pivot.
class SingularPreconditionerError : public Error {
public:
    using Error::Error;
};

class DimensionMismatchError : public InvalidParameterError {
public:
    using InvalidParameterError::InvalidParameterError;
};

/// An accuracy metric has a zero denominator.
class UndefinedMetricError : public Error {
public:
    using Error::Error;
};

}  // namespace nmfg
