#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gscat {

enum class ErrorCode {
  InvalidOrder,
  InvalidParameter,
  Capacity,
  Unsupported,
  InvalidGenerators,
  Domain,
  Precondition,
  NumericalIntegrity,
  Format,
  UnsupportedFormat,
  DegeneratePrototype,
  BoundViolation,
  DegenerateLabel,
  FileNotFound,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace gscat
