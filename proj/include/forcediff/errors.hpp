#pragma once

#include <stdexcept>
#include <string>

namespace forcediff {

// Base of every error raised by the library. The CLI maps the subclasses
// onto distinct exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Array extents disagree with what an operation requires.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A value left the finite range (NaN or Inf).
class NumericError : public Error {
 public:
  using Error::Error;
};

// Misuse of the differentiation tape (foreign handle, non-scalar loss).
class GraphError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration value or argument outside its contract.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed or semantically invalid input data (CSV, spec file, checkpoint).
class DataError : public Error {
 public:
  using Error::Error;
};

// File system or socket failure.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace forcediff
