// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <memory>
#include <optional>

#include "dacp/net/socket.hpp"
#include "dacp/net/traffic.hpp"
#include "dacp/wire/frame.hpp"

namespace dacp::net {

/// Message-level view of a socket: frames out, reassembled messages in.
class FrameChannel {
 public:
  FrameChannel(Socket socket, std::uint32_t frame_cap = wire::kDefaultFrameCap,
               std::shared_ptr<TrafficCounters> counters = nullptr);

  void send(const wire::Message& msg);
  /// Sends bytes as-is (tests use this to inject malformed frames).
  void send_bytes(ByteView bytes);

  /// Blocks for the next message; nullopt when the peer closed cleanly.
  /// Throws WireError on malformed input, TransportError on socket errors.
  std::optional<wire::Message> receive();
  /// Like receive() but gives up after `timeout` (zero: only what is
  /// already buffered or readable). Check eof() when it returns nullopt.
  std::optional<wire::Message> try_receive(std::chrono::milliseconds timeout = std::chrono::milliseconds(0));

  bool eof() const { return eof_; }
  Socket& socket() { return socket_; }
  std::uint32_t frame_cap() const { return cap_; }

 private:
  std::optional<wire::Message> pop();
  bool fill(std::chrono::milliseconds timeout);

  Socket socket_;
  std::uint32_t cap_;
  std::shared_ptr<TrafficCounters> counters_;
  wire::FrameDecoder decoder_;
  bool eof_ = false;
  Bytes scratch_;
};

}  // namespace dacp::net
