#pragma once

#include <stdexcept>
#include <string>

namespace pollnet {

// Error hierarchy mirrors the CLI exit-code contract:
//   UsageError -> 1, DataError -> 2, NumericError -> 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad arguments, incompatible shapes, violated call contracts.
class UsageError : public Error {
 public:
  using Error::Error;
};

// Malformed or invalid external data (CSV cells, schema documents, model files).
class DataError : public Error {
 public:
  using Error::Error;
};

// Non-finite values where finite ones are required (diverged training).
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace pollnet
