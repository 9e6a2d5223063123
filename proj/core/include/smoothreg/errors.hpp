#pragma once

#include <stdexcept>
#include <string>

namespace smoothreg {

// Base class for every error raised by the library. The CLI maps the
// subclasses onto exit codes (input problems -> 2, invariant breaches -> 3).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller supplied an out-of-range hyperparameter or malformed argument.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Vectors or histories of the wrong length.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Input data fails a documented precondition (e.g. a distribution that does
// not sum to one).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A required history is missing from a model.
class CoverageError : public Error {
 public:
  using Error::Error;
};

// A smoother's configuration is unusable for the given counts.
class ConfigurationError : public Error {
 public:
  using Error::Error;
};

// Enumeration would exceed the configured size cap.
class SizeError : public Error {
 public:
  using Error::Error;
};

// Text or file input could not be parsed.
class InputError : public Error {
 public:
  using Error::Error;
};

// Conditional requested for a history the model leaves undefined (MLE 0/0).
class UndefinedHistoryError : public Error {
 public:
  using Error::Error;
};

// Loss became non-finite during optimisation.
class TrainingError : public Error {
 public:
  using Error::Error;
};

// An internal invariant was violated; indicates a bug.
class InternalError : public Error {
 public:
  using Error::Error;
};

}  // namespace smoothreg
