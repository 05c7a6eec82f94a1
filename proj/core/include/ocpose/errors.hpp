#pragma once

#include <stdexcept>
#include <string>

namespace ocpose {

// Broad failure classes. Each maps to one process exit code in the CLI.
enum class ErrorCategory {
  kUsage,  // bad arguments, empty grids, wrong arity
  kData,   // malformed or inconsistent input data
  kIo,     // unreadable / unwritable paths
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

struct UsageError : Error {
  explicit UsageError(const std::string& what) : Error(ErrorCategory::kUsage, what) {}
};

struct IoError : Error {
  explicit IoError(const std::string& what) : Error(ErrorCategory::kIo, what) {}
};

struct DataError : Error {
  explicit DataError(const std::string& what) : Error(ErrorCategory::kData, what) {}
};

// JSON that does not parse. `byte_offset` is where the parser gave up.
struct ParseError : DataError {
  ParseError(const std::string& what, std::size_t byte_offset)
      : DataError(what), byte_offset(byte_offset) {}
  std::size_t byte_offset;
};

struct SchemaError : DataError {
  using DataError::DataError;
};

struct ReferenceError : DataError {
  using DataError::DataError;
};

struct ConfigError : DataError {
  using DataError::DataError;
};

struct DecodeError : DataError {
  using DataError::DataError;
};

struct GeometryError : DataError {
  using DataError::DataError;
};

struct GenerationError : DataError {
  using DataError::DataError;
};

// 0 success, 1 usage, 2 data, 3 io.
inline int exit_code_for(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::kUsage:
      return 1;
    case ErrorCategory::kData:
      return 2;
    case ErrorCategory::kIo:
      return 3;
  }
  return 2;
}

}  // namespace ocpose
