#pragma once

#include <stdexcept>
#include <string>

namespace metric_lab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument is outside the domain of the operation.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// A builder would exceed the configured point budget.
class SizeError : public Error {
 public:
  using Error::Error;
};

/// Too few samples to fit a regression (e.g. a single-radius window).
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

/// An empirical check contradicted an inequality that holds by construction.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

/// A hypothesis of a theorem check is not met by the inputs.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// The Luxemburg modular stays above 1 for every admissible lambda.
class UnboundedNormError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace metric_lab
