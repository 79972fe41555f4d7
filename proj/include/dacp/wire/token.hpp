// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "dacp/util/bytes.hpp"

namespace dacp::wire {

inline constexpr std::size_t kTokenBytes = 32;
inline constexpr std::size_t kTokenTextLength = 43;

enum class TokenScope { Session, Stream };

/// Short-lived bearer credential. Only the issuing side sees `secret`; the
/// server stores `digest()` of it.
struct AccessToken {
  Bytes secret;
  std::uint64_t expiry = 0;
  TokenScope scope = TokenScope::Session;
  std::string stream_id;

  /// 43-character unpadded base64url text form.
  std::string text() const;

  static AccessToken issue(std::uint64_t now, std::uint64_t ttl_seconds, TokenScope scope,
                           std::string stream_id = {});
};

/// Decodes token text into the 32 raw bytes; nullopt when the text is not a
/// well-formed token.
std::optional<Bytes> parse_token_text(std::string_view text);

/// Digest under which a token is stored and looked up.
Bytes token_digest(ByteView secret);

}  // namespace dacp::wire
