#pragma once

#include <stdexcept>

namespace conststyle {

// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Tensor/vector dimensions do not line up.
struct ShapeError : Error {
  using Error::Error;
};

// A declared data invariant does not hold (asymmetry, NaN, ...).
struct InvariantError : Error {
  using Error::Error;
};

// Matrix is not positive semidefinite where PSD is required.
struct NotPsdError : Error {
  using Error::Error;
};

// Iteration failed to converge or produced non-finite values.
struct NumericalError : Error {
  using Error::Error;
};

// An operation over a domain/sample collection received no data.
struct EmptyDomainError : Error {
  using Error::Error;
};

// Fewer data points than the fit requires.
struct InsufficientDataError : Error {
  using Error::Error;
};

// Invalid configuration or parameter value.
struct ConfigError : Error {
  using Error::Error;
};

// Operation issued against an object in the wrong state.
struct StateError : Error {
  using Error::Error;
};

}  // namespace conststyle
