// SPDX-License-Identifier: Apache-2.0
#include "dacp/server/tokens.hpp"

#include "dacp/error.hpp"
#include "dacp/util/crypto.hpp"

namespace dacp::server {

wire::AccessToken SessionTokens::issue(std::uint64_t now, std::uint64_t ttl_seconds, std::string principal) {
  auto token = wire::AccessToken::issue(now, ttl_seconds, wire::TokenScope::Session);
  std::lock_guard lock(mu_);
  entries_[wire::token_digest(token.secret)] = Entry{token.expiry, std::move(principal)};
  return token;
}

std::string SessionTokens::check(std::string_view token_text, std::uint64_t now) const {
  auto secret = wire::parse_token_text(token_text);
  if (!secret) throw Error::forbidden("malformed token");
  // Lookup is by digest, so timing reveals nothing about stored secrets.
  const Bytes key = wire::token_digest(*secret);
  std::lock_guard lock(mu_);
  auto it = entries_.find(key);
  if (it == entries_.end()) throw Error::forbidden("unknown token");
  if (now >= it->second.expiry) throw Error(ErrorCode::TokenExpired, "token expired");
  return it->second.principal;
}

std::size_t SessionTokens::sweep(std::uint64_t now) {
  std::lock_guard lock(mu_);
  std::size_t n = 0;
  for (auto it = entries_.begin(); it != entries_.end();) {
    if (it->second.expiry + kExpiredGraceSeconds <= now) {
      it = entries_.erase(it);
      ++n;
    } else {
      ++it;
    }
  }
  return n;
}

std::size_t SessionTokens::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

PublishRegistry::Published PublishRegistry::publish(dag::DagTask task, std::string principal, std::uint64_t now, std::uint64_t ttl_seconds) {
  Published out;
  std::lock_guard lock(mu_);
  do {
    out.stream_id = crypto::hex_encode(crypto::random_bytes(16));
  } while (entries_.count(out.stream_id) || tombstones_.count(out.stream_id));
  out.token = wire::AccessToken::issue(now, ttl_seconds, wire::TokenScope::Stream, out.stream_id);
  entries_.emplace(out.stream_id, Entry{std::move(task), std::move(principal), wire::token_digest(out.token.secret), out.token.expiry, false});
  return out;
}

PublishRegistry::Claimed PublishRegistry::claim(std::string_view stream_id, std::string_view token_text, std::uint64_t now) {
  auto secret = wire::parse_token_text(token_text);
  std::lock_guard lock(mu_);
  auto it = entries_.find(stream_id);
  if (it == entries_.end()) {
    if (tombstones_.count(stream_id)) throw Error(ErrorCode::TokenExpired, "stream expired");
    throw Error::not_found("unknown stream");
  }
  Entry& e = it->second;
  // A wrong-length stand-in keeps the comparison in the same code path.
  const Bytes presented = secret ? wire::token_digest(*secret) : Bytes(e.token_digest.size() + 1, 0);
  if (!crypto::constant_time_equal(presented, e.token_digest)) throw Error::forbidden("stream token mismatch");
  if (e.consumed) throw Error::not_found("stream already consumed");
  if (now >= e.expiry) throw Error(ErrorCode::TokenExpired, "stream token expired");
  e.consumed = true;
  return Claimed{e.task, e.principal};
}

std::size_t PublishRegistry::sweep(std::uint64_t now) {
  std::lock_guard lock(mu_);
  std::size_t reaped = 0;
  for (auto it = entries_.begin(); it != entries_.end();) {
    if (now >= it->second.expiry) {
      if (!it->second.consumed) ++reaped;
      tombstones_[it->first] = it->second.expiry;
      it = entries_.erase(it);
    } else {
      ++it;
    }
  }
  for (auto it = tombstones_.begin(); it != tombstones_.end();) {
    if (it->second + kExpiredGraceSeconds <= now) {
      it = tombstones_.erase(it);
    } else {
      ++it;
    }
  }
  return reaped;
}

std::size_t PublishRegistry::live() const {
  std::lock_guard lock(mu_);
  std::size_t n = 0;
  for (const auto& [id, e] : entries_) n += e.consumed ? 0 : 1;
  return n;
}

bool PublishRegistry::contains(std::string_view stream_id) const {
  std::lock_guard lock(mu_);
  return entries_.count(stream_id) > 0;
}

}  // namespace dacp::server
