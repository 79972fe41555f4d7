// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "dacp/error.hpp"
#include "dacp/sdf/record_batch.hpp"
#include "dacp/util/bytes.hpp"

namespace dacp::wire {

enum class WireFault {
  FrameTooLarge,
  MalformedFrame,
  MalformedMessage,
  MalformedSchema,
  MalformedBatch,
};

std::string_view to_string(WireFault f);

/// Decoding or encoding failure. Always classified as BadRequest on the
/// protocol level.
class WireError : public Error {
 public:
  WireError(WireFault fault, const std::string& message)
      : Error(ErrorCode::BadRequest, std::string(to_string(fault)) + ": " + message), fault_(fault) {}

  WireFault fault() const noexcept { return fault_; }

 private:
  WireFault fault_;
};

/// [field_count u16][per field: name (u32 len + UTF-8), tag u8, nullable u8]
Bytes encode_schema(const Schema& schema);
void encode_schema_into(const Schema& schema, Bytes& out);
/// Throws WireError(MalformedSchema). The whole input must be consumed.
Schema decode_schema(ByteView bytes);

/// [row_count u32] then per column: validity bitmap, data.
Bytes encode_batch(const RecordBatch& batch);
void encode_batch_into(const RecordBatch& batch, Bytes& out);

/// Structural decode against `schema`. Non-canonical input (pad bits, bytes
/// under null rows) is normalised. Throws WireError(MalformedBatch) on
/// structural problems; does not enforce nullability, which is the job of
/// validate_batch.
RecordBatch decode_batch(ByteView bytes, const SchemaPtr& schema);

/// Splits `batch` by halving until every piece encodes into a BATCH frame
/// under `frame_cap`. Throws WireError(FrameTooLarge) if one row is too big.
std::vector<RecordBatch> split_to_fit(const RecordBatch& batch, std::uint32_t frame_cap);

}  // namespace dacp::wire
