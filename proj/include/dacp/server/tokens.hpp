// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include "dacp/dag/task.hpp"
#include "dacp/wire/token.hpp"

namespace dacp::server {

/// Expired entries are kept this long so late requests get TOKEN_EXPIRED
/// rather than a generic rejection.
inline constexpr std::uint64_t kExpiredGraceSeconds = 3600;

/// Session tokens, stored by digest. Thread-safe.
class SessionTokens {
 public:
  wire::AccessToken issue(std::uint64_t now, std::uint64_t ttl_seconds, std::string principal);

  /// Returns the principal. Throws Error(Forbidden) for malformed or unknown
  /// tokens, Error(TokenExpired) once `now` reaches the expiry.
  std::string check(std::string_view token_text, std::uint64_t now) const;

  /// Drops tokens that expired more than the grace period ago.
  std::size_t sweep(std::uint64_t now);
  std::size_t size() const;

 private:
  struct Entry {
    std::uint64_t expiry;
    std::string principal;
  };
  mutable std::mutex mu_;
  std::map<Bytes, Entry> entries_;
};

/// Deferred tasks registered by COOK_PUBLISH. Each entry can be claimed
/// once, with its own stream token. Thread-safe.
class PublishRegistry {
 public:
  struct Published {
    std::string stream_id;
    wire::AccessToken token;
  };

  /// Tasks run with the rights of the principal that published them.
  struct Claimed {
    dag::DagTask task;
    std::string principal;
  };

  Published publish(dag::DagTask task, std::string principal, std::uint64_t now, std::uint64_t ttl_seconds);

  /// Marks the stream consumed and hands out its task.
  /// Unknown id: NotFound. Reaped after expiry: TokenExpired. Token does not
  /// match: Forbidden. Already consumed: NotFound. Expired: TokenExpired.
  Claimed claim(std::string_view stream_id, std::string_view token_text, std::uint64_t now);

  /// Removes expired entries, leaving a tombstone for the grace period.
  /// Returns how many of them were never consumed.
  std::size_t sweep(std::uint64_t now);

  std::size_t live() const;
  bool contains(std::string_view stream_id) const;

 private:
  struct Entry {
    dag::DagTask task;
    std::string principal;
    Bytes token_digest;
    std::uint64_t expiry = 0;
    bool consumed = false;
  };
  mutable std::mutex mu_;
  std::map<std::string, Entry, std::less<>> entries_;
  std::map<std::string, std::uint64_t, std::less<>> tombstones_;
};

}  // namespace dacp::server
