#include "gscat/error.hpp"

namespace gscat {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidOrder: return "invalid-order";
    case ErrorCode::InvalidParameter: return "invalid-parameter";
    case ErrorCode::Capacity: return "capacity";
    case ErrorCode::Unsupported: return "unsupported";
    case ErrorCode::InvalidGenerators: return "invalid-generators";
    case ErrorCode::Domain: return "domain";
    case ErrorCode::Precondition: return "precondition";
    case ErrorCode::NumericalIntegrity: return "numerical-integrity";
    case ErrorCode::Format: return "format";
    case ErrorCode::UnsupportedFormat: return "unsupported-format";
    case ErrorCode::DegeneratePrototype: return "degenerate-prototype";
    case ErrorCode::BoundViolation: return "bound-violation";
    case ErrorCode::DegenerateLabel: return "degenerate-label";
    case ErrorCode::FileNotFound: return "file-not-found";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + " error: " + message), code_(code) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace gscat
