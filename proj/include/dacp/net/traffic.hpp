// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <atomic>
#include <cstdint>

#include "dacp/wire/messages.hpp"

namespace dacp::net {

/// Frame and byte counts per message type, each direction. `bytes` counts
/// whole frames (header included); `payload` counts payload bytes only.
class TrafficCounters {
 public:
  struct Direction {
    std::array<std::atomic<std::uint64_t>, 256> frames{};
    std::array<std::atomic<std::uint64_t>, 256> bytes{};
    std::array<std::atomic<std::uint64_t>, 256> payload{};
  };

  void record_in(wire::MsgType t, std::size_t payload_bytes) { record(in_, t, payload_bytes); }
  void record_out(wire::MsgType t, std::size_t payload_bytes) { record(out_, t, payload_bytes); }

  std::uint64_t frames_in(wire::MsgType t) const { return in_.frames[idx(t)].load(); }
  std::uint64_t frames_out(wire::MsgType t) const { return out_.frames[idx(t)].load(); }
  std::uint64_t bytes_in(wire::MsgType t) const { return in_.bytes[idx(t)].load(); }
  std::uint64_t bytes_out(wire::MsgType t) const { return out_.bytes[idx(t)].load(); }
  std::uint64_t payload_in(wire::MsgType t) const { return in_.payload[idx(t)].load(); }
  std::uint64_t payload_out(wire::MsgType t) const { return out_.payload[idx(t)].load(); }

  std::uint64_t total_bytes_in() const { return sum(in_.bytes); }
  std::uint64_t total_bytes_out() const { return sum(out_.bytes); }

  void reset() {
    for (auto* d : {&in_, &out_}) {
      for (std::size_t i = 0; i < 256; ++i) {
        d->frames[i] = 0;
        d->bytes[i] = 0;
        d->payload[i] = 0;
      }
    }
  }

 private:
  static std::size_t idx(wire::MsgType t) { return static_cast<std::uint8_t>(t); }
  static void record(Direction& d, wire::MsgType t, std::size_t payload_bytes) {
    d.frames[idx(t)] += 1;
    d.bytes[idx(t)] += payload_bytes + 5;
    d.payload[idx(t)] += payload_bytes;
  }
  static std::uint64_t sum(const std::array<std::atomic<std::uint64_t>, 256>& a) {
    std::uint64_t s = 0;
    for (const auto& v : a) s += v.load();
    return s;
  }

  Direction in_;
  Direction out_;
};

}  // namespace dacp::net
