#pragma once

#include <stdexcept>
#include <string>

namespace toklab {

/// Malformed or unusable input data (files, columns, degenerate samples).
/// The CLI maps this to exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad arguments or configuration. The CLI maps this to exit code 1.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A broken internal invariant. The CLI maps this to exit code 3.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Model file could not be read back (bad version, checksum, truncation).
class ModelFormatError : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace toklab
