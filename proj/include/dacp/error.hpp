// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dacp {

/// Protocol-level error classification. Values are the u16 codes carried in
/// ERROR frames.
enum class ErrorCode : std::uint16_t {
  AuthFailed = 1,
  NotFound = 2,
  Forbidden = 3,
  BadRequest = 4,
  TypeError = 5,
  TokenExpired = 6,
  Internal = 7,
};

std::string_view to_string(ErrorCode code);

/// Returns true when `raw` is one of the codes above.
bool is_known_error_code(std::uint16_t raw);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  static Error not_found(const std::string& m) { return {ErrorCode::NotFound, m}; }
  static Error forbidden(const std::string& m) { return {ErrorCode::Forbidden, m}; }
  static Error bad_request(const std::string& m) { return {ErrorCode::BadRequest, m}; }
  static Error type_error(const std::string& m) { return {ErrorCode::TypeError, m}; }
  static Error internal(const std::string& m) { return {ErrorCode::Internal, m}; }

 private:
  ErrorCode code_;
};

/// Failure of the underlying byte transport (connect refused, peer reset).
/// Classified as Internal on the protocol level.
class TransportError : public Error {
 public:
  explicit TransportError(const std::string& message) : Error(ErrorCode::Internal, message) {}
};

}  // namespace dacp
