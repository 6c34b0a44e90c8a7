#pragma once

#include <stdexcept>
#include <string>

namespace ooda {

/// Base for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or argument (CLI exit code 1).
struct ConfigError : Error {
  using Error::Error;
};

/// Malformed or inconsistent data (missing labels, schema mismatch).
struct DataError : Error {
  using Error::Error;
};

/// Failed to parse a serialized artifact; message carries the line number.
struct ParseError : Error {
  using Error::Error;
};

/// Tensor dimensions inconsistent with the declared schema.
struct ShapeError : Error {
  using Error::Error;
};

/// Non-finite values or diverging iterations.
struct NumericError : Error {
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation.
struct DomainError : Error {
  using Error::Error;
};

/// Filesystem failures.
struct IoError : Error {
  using Error::Error;
};

}  // namespace ooda
