#pragma once

#include <stdexcept>
#include <string>

namespace rbrm {

/// Base class for all library errors.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Input violates a documented precondition (bad matrix, bad probability, ...).
class InvalidInputError : public Error {
  public:
    using Error::Error;
};

/// Scenario file failed parsing or schema validation; message names the field.
class SchemaError : public InvalidInputError {
  public:
    using InvalidInputError::InvalidInputError;
};

/// Matrix is singular or indefinite where positive definiteness is required.
class SingularMatrixError : public Error {
  public:
    using Error::Error;
};

/// Sensor cannot observe the queried state (range gate fails).
class OutOfRangeError : public Error {
  public:
    using Error::Error;
};

/// Start and goal are not connected, or the search exhausted the graph.
class NoPathError : public Error {
  public:
    using Error::Error;
};

/// Requested enumeration exceeds the configured exponential-size guard.
class ComplexityGuardError : public Error {
  public:
    using Error::Error;
};

/// A floating-point computation degenerated (non-finite or inconsistent).
class NumericalFailureError : public Error {
  public:
    using Error::Error;
};

/// Inputs are outside the domain the closed-form expression supports.
class UnsupportedInputError : public Error {
  public:
    using Error::Error;
};

}  // namespace rbrm
