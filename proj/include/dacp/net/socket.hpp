// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

#include "dacp/util/bytes.hpp"

namespace dacp::net {

/// Owning TCP socket. Errors throw TransportError.
class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  ~Socket();
  Socket(Socket&& o) noexcept : fd_(o.fd_) { o.fd_ = -1; }
  Socket& operator=(Socket&& o) noexcept;
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;

  bool valid() const { return fd_ >= 0; }
  int fd() const { return fd_; }

  void send_all(ByteView data);
  /// Reads up to `max` bytes; 0 means the peer closed. Waits at most
  /// `timeout` (negative: forever); returns nullopt on timeout.
  std::optional<std::size_t> recv_some(std::uint8_t* buf, std::size_t max, std::chrono::milliseconds timeout);
  /// Wakes any thread blocked on this socket; safe to call concurrently.
  void shutdown();
  void close();

  std::string peer() const;

 private:
  int fd_ = -1;
};

Socket connect_tcp(const std::string& host, std::uint16_t port,
                   std::chrono::milliseconds timeout = std::chrono::seconds(10));

class Listener {
 public:
  /// Binds and listens; port 0 picks an ephemeral port.
  Listener(const std::string& host, std::uint16_t port);

  std::uint16_t port() const { return port_; }
  /// Blocks for the next connection; nullopt once shut down.
  std::optional<Socket> accept();
  void shutdown();

 private:
  Socket sock_;
  std::uint16_t port_ = 0;
};

}  // namespace dacp::net
