// SPDX-License-Identifier: Apache-2.0
#include "dacp/wire/token.hpp"

#include "dacp/util/crypto.hpp"

namespace dacp::wire {

std::string AccessToken::text() const { return crypto::base64url_encode(secret); }

AccessToken AccessToken::issue(std::uint64_t now, std::uint64_t ttl_seconds, TokenScope scope,
                               std::string stream_id) {
  AccessToken t;
  t.secret = crypto::random_bytes(kTokenBytes);
  t.expiry = now + (ttl_seconds == 0 ? 1 : ttl_seconds);
  t.scope = scope;
  t.stream_id = std::move(stream_id);
  return t;
}

std::optional<Bytes> parse_token_text(std::string_view text) {
  if (text.size() != kTokenTextLength) return std::nullopt;
  Bytes out;
  if (!crypto::base64url_decode(text, out) || out.size() != kTokenBytes) return std::nullopt;
  // Reject encodings that differ only in the unused low bits of the last character.
  if (crypto::base64url_encode(out) != text) return std::nullopt;
  return out;
}

Bytes token_digest(ByteView secret) { return crypto::digest(secret); }

}  // namespace dacp::wire
