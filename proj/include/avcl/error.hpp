#pragma once

#include <stdexcept>
#include <string>

namespace avcl {

// Base of every error thrown by the library. The CLI maps subclasses onto
// stable exit codes (see cli.hpp).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Value outside the mathematical domain of an op (log of x <= 0, x / 0).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Caller violated an API precondition.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Zero-norm feature row/column where a normalization needs a non-zero norm.
class DegenerateError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Non-finite loss during training.
class NumericAbort : public Error {
 public:
  using Error::Error;
};

class CheckpointError : public Error {
 public:
  using Error::Error;
};

/// Malformed or unsupported audio file.
class DecodeError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace avcl
