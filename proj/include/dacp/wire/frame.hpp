// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <deque>
#include <optional>

#include "dacp/wire/codec.hpp"
#include "dacp/wire/messages.hpp"

namespace dacp::wire {

/// Maximum value of the length field (type byte + payload).
inline constexpr std::uint32_t kDefaultFrameCap = 16u * 1024u * 1024u;
inline constexpr std::size_t kFrameHeaderBytes = 5;

/// [length u32 LE][msg_type u8][payload], length = 1 + payload size.
/// Throws WireError(FrameTooLarge) if the frame would exceed `cap`.
Bytes encode_frame(const Message& msg, std::uint32_t cap = kDefaultFrameCap);
void encode_frame_into(const Message& msg, Bytes& out, std::uint32_t cap = kDefaultFrameCap);

/// A complete frame as read off the stream, payload still encoded.
struct RawFrame {
  MsgType type;
  Bytes payload;
};

/// Incremental frame reassembly. Feed arbitrary chunks; pull complete
/// frames. Any malformed input (zero or oversize length, unknown type,
/// undecodable payload) throws WireError and leaves the decoder failed.
class FrameDecoder {
 public:
  explicit FrameDecoder(std::uint32_t cap = kDefaultFrameCap) : cap_(cap) {}

  void feed(ByteView chunk);
  /// Next complete frame, or nullopt if more bytes are needed.
  std::optional<RawFrame> next_raw();
  /// next_raw() followed by payload decoding.
  std::optional<Message> next();

  std::size_t buffered() const { return buf_.size() - head_; }
  bool failed() const { return failed_; }

 private:
  [[noreturn]] void fail(WireFault f, const std::string& m);

  std::uint32_t cap_;
  Bytes buf_;
  std::size_t head_ = 0;
  bool failed_ = false;
};

/// Decodes a complete byte sequence into messages (convenience for tests).
std::vector<Message> decode_all(ByteView bytes, std::uint32_t cap = kDefaultFrameCap);

}  // namespace dacp::wire
