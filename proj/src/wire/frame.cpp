// SPDX-License-Identifier: Apache-2.0
#include "dacp/wire/frame.hpp"

namespace dacp::wire {

void encode_frame_into(const Message& msg, Bytes& out, std::uint32_t cap) {
  const std::size_t start = out.size();
  out.resize(start + kFrameHeaderBytes);
  if (const auto* b = std::get_if<BatchMsg>(&msg)) {
    out.insert(out.end(), b->body.begin(), b->body.end());
  } else {
    Bytes payload = encode_payload(msg);
    out.insert(out.end(), payload.begin(), payload.end());
  }
  const std::size_t length = out.size() - start - 4;
  if (length > cap) {
    out.resize(start);
    throw WireError(WireFault::FrameTooLarge, std::string(to_string(message_type(msg))) + " frame of " +
                                                  std::to_string(length) + " bytes exceeds cap " + std::to_string(cap));
  }
  store_u32_le(out.data() + start, static_cast<std::uint32_t>(length));
  out[start + 4] = static_cast<std::uint8_t>(message_type(msg));
}

Bytes encode_frame(const Message& msg, std::uint32_t cap) {
  Bytes out;
  encode_frame_into(msg, out, cap);
  return out;
}

void FrameDecoder::fail(WireFault f, const std::string& m) {
  failed_ = true;
  throw WireError(f, m);
}

void FrameDecoder::feed(ByteView chunk) {
  if (failed_) return;
  if (head_ > 0 && head_ >= buf_.size() / 2) {
    buf_.erase(buf_.begin(), buf_.begin() + static_cast<std::ptrdiff_t>(head_));
    head_ = 0;
  }
  buf_.insert(buf_.end(), chunk.begin(), chunk.end());
}

std::optional<RawFrame> FrameDecoder::next_raw() {
  if (failed_) throw WireError(WireFault::MalformedFrame, "decoder already failed");
  const std::size_t avail = buf_.size() - head_;
  if (avail < 4) return std::nullopt;
  const std::uint32_t length = load_u32_le(buf_.data() + head_);
  if (length == 0) fail(WireFault::MalformedFrame, "zero-length frame");
  if (length > cap_) {
    fail(WireFault::MalformedFrame, "declared length " + std::to_string(length) + " exceeds cap " + std::to_string(cap_));
  }
  if (avail >= 5 && !is_known_msg_type(buf_[head_ + 4])) {
    static constexpr char kHex[] = "0123456789abcdef";
    const std::uint8_t t = buf_[head_ + 4];
    fail(WireFault::MalformedFrame, std::string("unknown message type 0x") + kHex[t >> 4] + kHex[t & 15]);
  }
  if (avail < 4 + static_cast<std::size_t>(length)) return std::nullopt;
  RawFrame f;
  f.type = static_cast<MsgType>(buf_[head_ + 4]);
  const auto* begin = buf_.data() + head_ + kFrameHeaderBytes;
  f.payload.assign(begin, begin + (length - 1));
  head_ += 4 + length;
  if (head_ == buf_.size()) {
    buf_.clear();
    head_ = 0;
  }
  return f;
}

std::optional<Message> FrameDecoder::next() {
  auto raw = next_raw();
  if (!raw) return std::nullopt;
  try {
    return decode_payload(raw->type, raw->payload);
  } catch (const WireError&) {
    failed_ = true;
    throw;
  }
}

std::vector<Message> decode_all(ByteView bytes, std::uint32_t cap) {
  FrameDecoder d(cap);
  d.feed(bytes);
  std::vector<Message> out;
  while (auto m = d.next()) out.push_back(std::move(*m));
  if (d.buffered() != 0) throw WireError(WireFault::MalformedFrame, "truncated frame at end of input");
  return out;
}

}  // namespace dacp::wire
