// SPDX-License-Identifier: Apache-2.0
#include "dacp/error.hpp"

namespace dacp {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::AuthFailed: return "AUTH_FAILED";
    case ErrorCode::NotFound: return "NOT_FOUND";
    case ErrorCode::Forbidden: return "FORBIDDEN";
    case ErrorCode::BadRequest: return "BAD_REQUEST";
    case ErrorCode::TypeError: return "TYPE_ERROR";
    case ErrorCode::TokenExpired: return "TOKEN_EXPIRED";
    case ErrorCode::Internal: return "INTERNAL";
  }
  return "UNKNOWN";
}

bool is_known_error_code(std::uint16_t raw) { return raw >= 1 && raw <= 7; }

}  // namespace dacp
