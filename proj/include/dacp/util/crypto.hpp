// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>

#include "dacp/util/bytes.hpp"

namespace dacp::crypto {

Bytes random_bytes(std::size_t n);

std::string base64url_encode(ByteView b);
/// Returns false on malformed input.
bool base64url_decode(std::string_view text, Bytes& out);

std::string base64_encode(ByteView b);
bool base64_decode(std::string_view text, Bytes& out);

std::string hex_encode(ByteView b);

/// 32-byte keyed-free BLAKE2b digest.
Bytes digest(ByteView b);

bool constant_time_equal(ByteView a, ByteView b);

/// Argon2id password hash in the self-describing "$argon2id$..." string form.
std::string hash_password(std::string_view password, bool fast = false);
bool verify_password(std::string_view password, const std::string& hash);

}  // namespace dacp::crypto
