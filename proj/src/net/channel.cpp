// SPDX-License-Identifier: Apache-2.0
#include "dacp/net/channel.hpp"

#include "dacp/error.hpp"

namespace dacp::net {

namespace {
constexpr std::size_t kReadChunk = 64 * 1024;
}

FrameChannel::FrameChannel(Socket socket, std::uint32_t frame_cap, std::shared_ptr<TrafficCounters> counters)
    : socket_(std::move(socket)), cap_(frame_cap), counters_(std::move(counters)), decoder_(frame_cap) {
  scratch_.resize(kReadChunk);
}

void FrameChannel::send(const wire::Message& msg) {
  Bytes frame = wire::encode_frame(msg, cap_);
  socket_.send_all(frame);
  if (counters_) counters_->record_out(wire::message_type(msg), frame.size() - wire::kFrameHeaderBytes);
}

void FrameChannel::send_bytes(ByteView bytes) { socket_.send_all(bytes); }

std::optional<wire::Message> FrameChannel::pop() {
  auto raw = decoder_.next_raw();
  if (!raw) return std::nullopt;
  if (counters_) counters_->record_in(raw->type, raw->payload.size());
  return wire::decode_payload(raw->type, raw->payload);
}

bool FrameChannel::fill(std::chrono::milliseconds timeout) {
  auto n = socket_.recv_some(scratch_.data(), scratch_.size(), timeout);
  if (!n) return false;
  if (*n == 0) {
    eof_ = true;
    return false;
  }
  decoder_.feed(ByteView(scratch_.data(), *n));
  return true;
}

std::optional<wire::Message> FrameChannel::receive() {
  while (true) {
    if (auto m = pop()) return m;
    if (eof_) {
      if (decoder_.buffered() != 0) throw TransportError("connection closed mid-frame");
      return std::nullopt;
    }
    fill(std::chrono::milliseconds(-1));
  }
}

std::optional<wire::Message> FrameChannel::try_receive(std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (true) {
    if (auto m = pop()) return m;
    if (eof_) return std::nullopt;
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() < 0) left = std::chrono::milliseconds(0);
    if (!fill(left)) {
      if (eof_ || left.count() == 0) return std::nullopt;
    }
  }
}

}  // namespace dacp::net
