// SPDX-License-Identifier: Apache-2.0
#include "dacp/util/crypto.hpp"

#include <sodium.h>

#include <stdexcept>

namespace dacp::crypto {
namespace {

void ensure_init() {
  static const bool ok = sodium_init() >= 0;
  if (!ok) throw std::runtime_error("libsodium initialisation failed");
}

std::string b64_encode(ByteView b, int variant) {
  ensure_init();
  std::string out(sodium_base64_encoded_len(b.size(), variant), '\0');
  sodium_bin2base64(out.data(), out.size(), b.data(), b.size(), variant);
  out.resize(out.size() - 1);  // trailing NUL
  return out;
}

bool b64_decode(std::string_view text, Bytes& out, int variant) {
  ensure_init();
  out.assign(text.size() / 4 * 3 + 3, 0);
  std::size_t len = 0;
  const char* end = nullptr;
  if (sodium_base642bin(out.data(), out.size(), text.data(), text.size(), nullptr, &len, &end,
                        variant) != 0) {
    return false;
  }
  if (end != text.data() + text.size()) return false;
  out.resize(len);
  return true;
}

}  // namespace

Bytes random_bytes(std::size_t n) {
  ensure_init();
  Bytes out(n);
  randombytes_buf(out.data(), n);
  return out;
}

std::string base64url_encode(ByteView b) { return b64_encode(b, sodium_base64_VARIANT_URLSAFE_NO_PADDING); }
bool base64url_decode(std::string_view text, Bytes& out) {
  return b64_decode(text, out, sodium_base64_VARIANT_URLSAFE_NO_PADDING);
}

std::string base64_encode(ByteView b) { return b64_encode(b, sodium_base64_VARIANT_ORIGINAL); }
bool base64_decode(std::string_view text, Bytes& out) {
  return b64_decode(text, out, sodium_base64_VARIANT_ORIGINAL);
}

std::string hex_encode(ByteView b) {
  ensure_init();
  std::string out(b.size() * 2 + 1, '\0');
  sodium_bin2hex(out.data(), out.size(), b.data(), b.size());
  out.pop_back();
  return out;
}

Bytes digest(ByteView b) {
  ensure_init();
  Bytes out(crypto_generichash_BYTES);
  crypto_generichash(out.data(), out.size(), b.data(), b.size(), nullptr, 0);
  return out;
}

bool constant_time_equal(ByteView a, ByteView b) {
  ensure_init();
  if (a.size() != b.size()) return false;
  return sodium_memcmp(a.data(), b.data(), a.size()) == 0;
}

std::string hash_password(std::string_view password, bool fast) {
  ensure_init();
  char out[crypto_pwhash_STRBYTES];
  auto ops = fast ? crypto_pwhash_OPSLIMIT_MIN : crypto_pwhash_OPSLIMIT_INTERACTIVE;
  auto mem = fast ? crypto_pwhash_MEMLIMIT_MIN : crypto_pwhash_MEMLIMIT_INTERACTIVE;
  if (crypto_pwhash_str(out, password.data(), password.size(), ops, mem) != 0) {
    throw std::runtime_error("password hashing ran out of memory");
  }
  return out;
}

bool verify_password(std::string_view password, const std::string& hash) {
  ensure_init();
  return crypto_pwhash_str_verify(hash.c_str(), password.data(), password.size()) == 0;
}

}  // namespace dacp::crypto
