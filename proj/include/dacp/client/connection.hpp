// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dacp/dag/task.hpp"
#include "dacp/net/traffic.hpp"
#include "dacp/sdf/frame.hpp"
#include "dacp/uri.hpp"
#include "dacp/util/clock.hpp"
#include "dacp/wire/frame.hpp"

namespace dacp::client {

struct Credentials {
  enum class Kind { Anonymous, Basic, Token };

  Kind kind = Kind::Anonymous;
  std::string username;
  std::string password;
  std::string token;  // pre-issued session token (no AUTH exchange)

  static Credentials anonymous() { return {}; }
  static Credentials basic(std::string user, std::string pass) {
    return {Kind::Basic, std::move(user), std::move(pass), {}};
  }
  static Credentials bearer(std::string token) { return {Kind::Token, {}, {}, std::move(token)}; }
};

struct ClientOptions {
  /// Credit window in batches; CREDIT tops it up once fewer than half of it
  /// remain outstanding.
  std::uint32_t window = 4;
  std::uint32_t frame_cap = wire::kDefaultFrameCap;
  std::chrono::milliseconds connect_timeout{10'000};
  /// Re-AUTH before a request when the token expires within this margin.
  std::uint64_t reauth_margin_seconds = 60;
  std::shared_ptr<Clock> clock;
  std::shared_ptr<net::TrafficCounters> counters;
};

/// Result of COOK_PUBLISH.
struct Publication {
  Endpoint endpoint;
  std::string stream_id;
  std::string stream_token;
  std::uint64_t expiry = 0;
  SchemaPtr schema;
};

class FrameBuilder;

/// One authenticated connection. At most one data stream is in flight; a
/// stream dropped before its end closes the connection. Not thread-safe.
class Connection {
 public:
  /// HELLO then AUTH (or HELLO only for bearer credentials).
  /// Throws Error(AuthFailed) with the server's message, TransportError.
  static Connection connect(const Endpoint& endpoint, Credentials credentials, ClientOptions options = {});

  Connection(Connection&&) noexcept;
  Connection& operator=(Connection&&) noexcept;
  ~Connection();

  const Endpoint& endpoint() const;
  bool is_open() const;
  const std::string& token() const;
  std::uint64_t token_expiry() const;
  /// AUTH exchanges performed so far, including the first.
  std::size_t auth_count() const;

  StreamingDataFrame get(const std::string& uri, std::optional<std::vector<std::string>> projection = std::nullopt,
                         std::optional<std::string> predicate = std::nullopt);
  StreamingDataFrame cook(const dag::DagTask& task);
  StreamingDataFrame cook(const std::string& dag_document);
  /// Uploads every batch of `data`; returns the server's row count.
  std::uint64_t put(const std::string& uri, StreamingDataFrame data);
  Publication publish(const dag::DagTask& task, std::uint32_t ttl_seconds = 600);
  /// PULL over this connection. With `expected_schema` the request is sent
  /// on the first pull; without it, immediately (to learn the schema).
  StreamingDataFrame pull(const std::string& stream_id, const std::string& stream_token,
                          SchemaPtr expected_schema = nullptr);
  /// Drill-down into a blob reference (a GET of its uri).
  StreamingDataFrame expand(const BlobRef& blob);

  FrameBuilder frame(const std::string& uri);

  void close();

  struct Impl;

 private:
  explicit Connection(std::shared_ptr<Impl> impl);
  std::shared_ptr<Impl> impl_;
};

/// Connects without AUTH and pulls a published stream. With a known schema
/// both the connection and the PULL wait for the first pull.
StreamingDataFrame pull_stream(const Endpoint& endpoint, const std::string& stream_id,
                               const std::string& stream_token, SchemaPtr expected_schema = nullptr,
                               ClientOptions options = {});

}  // namespace dacp::client
