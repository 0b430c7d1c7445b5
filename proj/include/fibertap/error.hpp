#pragma once

#include <stdexcept>
#include <string>

namespace fibertap {

// Base of every exception thrown by the library. exit_code() is the CLI
// status for the error class.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const noexcept { return 1; }
};

// Invalid or inconsistent configuration values.
class ConfigError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 2; }
};

// File could not be read, written or decoded.
class IoError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 3; }
};

// Numeric domain violations: non-finite samples, f <= 0, unstable filters.
class NumericError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 4; }
};

// Carrier or cutoff not representable at the sample rate.
class NyquistError : public NumericError {
 public:
  using NumericError::NumericError;
};

// Input traces with the wrong kind, length or rate for an operation.
class InputError : public NumericError {
 public:
  using NumericError::NumericError;
};

// Noise estimation had nothing to work with (no silent frames).
class EstimationError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 5; }
};

}  // namespace fibertap
