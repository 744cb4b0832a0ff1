#include "linksched/error.hpp"

namespace linksched {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInternal: return "internal error";
    case ErrorCode::kConfig: return "configuration error";
    case ErrorCode::kInput: return "input error";
    case ErrorCode::kNumerical: return "numerical abort";
    case ErrorCode::kCompatibility: return "compatibility error";
    case ErrorCode::kState: return "state error";
  }
  return "unknown error";
}

}  // namespace linksched
