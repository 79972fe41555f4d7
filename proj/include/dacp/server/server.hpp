// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <functional>
#include <memory>
#include <optional>

#include "dacp/client/connection.hpp"
#include "dacp/datasource/registry.hpp"
#include "dacp/datasource/sources.hpp"
#include "dacp/net/traffic.hpp"
#include "dacp/server/config.hpp"
#include "dacp/server/tokens.hpp"
#include "dacp/uri.hpp"
#include "dacp/util/clock.hpp"

namespace dacp::server {

struct ServerOptions {
  std::shared_ptr<Clock> clock;
  /// Period of the sweep that reaps expired published streams and tokens.
  std::chrono::milliseconds reap_interval{30'000};
  /// Consulted before the dataset registry when a source.get is opened.
  /// Returning nullopt falls through to the registry.
  std::function<std::optional<StreamingDataFrame>(const Uri&)> source_override;
  /// Used when a task pulls a source.stream from another server.
  client::ClientOptions upstream;
};

/// A DACP server: one thread accepting, one thread per connection.
class Server {
 public:
  Server(ServerConfig config, datasource::DatasetRegistry datasets, UserStore users, ServerOptions options = {});
  /// Loads the dataset and user files named by the config.
  static std::unique_ptr<Server> from_config(const ServerConfig& config, ServerOptions options = {});
  ~Server();

  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds and starts serving. Throws TransportError when the port is taken.
  void start();
  /// Closes the listener and every connection, then joins all threads.
  void stop();
  /// Blocks until stop() is called from another thread.
  void wait();
  bool running() const;

  std::uint16_t port() const;
  Endpoint endpoint() const;

  /// Frames and bytes over all connections of this server.
  net::TrafficCounters& traffic();
  /// Reads performed by the data sources this server opened.
  datasource::SourceStats& source_stats();

  /// Runs the reaper sweep immediately.
  void sweep_now();
  std::size_t live_published() const;
  std::size_t open_connections() const;

  struct State;

 private:
  std::shared_ptr<State> state_;
};

}  // namespace dacp::server
