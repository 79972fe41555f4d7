// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <memory>
#include <stdexcept>
#include <string>

#include "dacp/net/channel.hpp"
#include "dacp/uri.hpp"

namespace dacp::testing {

/// Speaks the protocol frame by frame, with no client-side logic.
class RawClient {
 public:
  explicit RawClient(const Endpoint& ep)
      : counters_(std::make_shared<net::TrafficCounters>()),
        channel_(net::connect_tcp(ep.host, ep.port), wire::kDefaultFrameCap, counters_) {}

  void send(const wire::Message& m) { channel_.send(m); }
  void send_bytes(ByteView b) { channel_.send_bytes(b); }

  /// Next message, failing the test after `timeout`.
  wire::Message recv(std::chrono::milliseconds timeout = std::chrono::seconds(10)) {
    auto m = channel_.try_receive(timeout);
    if (!m) throw std::runtime_error(channel_.eof() ? "connection closed" : "timed out waiting for a frame");
    return std::move(*m);
  }

  /// nullopt when nothing arrives within `timeout`.
  std::optional<wire::Message> poll(std::chrono::milliseconds timeout) { return channel_.try_receive(timeout); }

  /// True once the server has closed the connection (waits up to `timeout`).
  bool closed_by_peer(std::chrono::milliseconds timeout = std::chrono::seconds(5)) {
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    while (std::chrono::steady_clock::now() < deadline) {
      try {
        channel_.try_receive(std::chrono::milliseconds(50));
      } catch (const std::exception&) {
        return true;
      }
      if (channel_.eof()) return true;
    }
    return false;
  }

  /// HELLO + anonymous AUTH; returns the session token.
  std::string handshake() {
    send(wire::Hello{});
    send(wire::Auth{});
    auto m = recv();
    auto* ok = std::get_if<wire::AuthOk>(&m);
    if (!ok) throw std::runtime_error("handshake failed");
    return ok->token;
  }

  net::TrafficCounters& counters() { return *counters_; }

 private:
  std::shared_ptr<net::TrafficCounters> counters_;
  net::FrameChannel channel_;
};

template <typename T>
const T& expect(const wire::Message& m) {
  if (auto* p = std::get_if<T>(&m)) return *p;
  throw std::runtime_error("unexpected message " + std::string(wire::to_string(wire::message_type(m))));
}

}  // namespace dacp::testing
