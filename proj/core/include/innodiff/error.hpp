#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace innodiff {

enum class ErrorCode {
  DimensionMismatch,
  OutOfRange,
  NonFinite,
  Schema,
  Io,
  InvalidArgument,
  StructureMismatch,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Structured error carried by every failing operation in the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace innodiff
