// SPDX-License-Identifier: Apache-2.0
#include "dacp/wire/codec.hpp"

#include <unordered_set>

#include "dacp/uri.hpp"
#include "dacp/util/utf8.hpp"

namespace dacp::wire {
namespace {

std::size_t bitmap_bytes(std::size_t n) { return (n + 7) / 8; }

[[noreturn]] void bad_schema(const std::string& m) { throw WireError(WireFault::MalformedSchema, m); }
[[noreturn]] void bad_batch(const std::string& m) { throw WireError(WireFault::MalformedBatch, m); }

}  // namespace

std::string_view to_string(WireFault f) {
  switch (f) {
    case WireFault::FrameTooLarge: return "frame too large";
    case WireFault::MalformedFrame: return "malformed frame";
    case WireFault::MalformedMessage: return "malformed message";
    case WireFault::MalformedSchema: return "malformed schema";
    case WireFault::MalformedBatch: return "malformed batch";
  }
  return "wire error";
}

void encode_schema_into(const Schema& schema, Bytes& out) {
  ByteWriter w(out);
  w.u16(static_cast<std::uint16_t>(schema.size()));
  for (const Field& f : schema.fields()) {
    w.str(f.name);
    w.u8(static_cast<std::uint8_t>(f.type));
    w.u8(f.nullable ? 1 : 0);
  }
}

Bytes encode_schema(const Schema& schema) {
  Bytes out;
  encode_schema_into(schema, out);
  return out;
}

Schema decode_schema(ByteView bytes) {
  try {
    ByteReader r(bytes);
    const std::uint16_t count = r.u16();
    if (count == 0) bad_schema("zero fields");
    if (count > kMaxFields) bad_schema("more than 4096 fields");
    std::vector<Field> fields;
    fields.reserve(count);
    std::unordered_set<std::string> seen;
    for (std::uint16_t i = 0; i < count; ++i) {
      Field f;
      f.name = r.str();
      if (!is_valid_field_name(f.name)) bad_schema("field " + std::to_string(i) + " has an invalid name");
      auto type = data_type_from_tag(r.u8());
      if (!type) bad_schema("field '" + f.name + "' has an unknown type tag");
      f.type = *type;
      std::uint8_t nullable = r.u8();
      if (nullable > 1) bad_schema("field '" + f.name + "' nullable flag is not 0 or 1");
      f.nullable = nullable == 1;
      if (!seen.insert(f.name).second) bad_schema("duplicate field name '" + f.name + "'");
      fields.push_back(std::move(f));
    }
    if (!r.at_end()) bad_schema(std::to_string(r.remaining()) + " trailing bytes");
    return Schema(std::move(fields));
  } catch (const TruncatedInput& t) {
    bad_schema("truncated at byte " + std::to_string(t.position));
  }
}

void encode_batch_into(const RecordBatch& batch, Bytes& out) {
  out.reserve(out.size() + batch.encoded_size());
  ByteWriter w(out);
  w.u32(static_cast<std::uint32_t>(batch.num_rows()));
  for (const auto& col : batch.columns()) {
    w.raw(col->validity());
    if (is_variable_width(col->type())) {
      for (std::uint32_t off : col->offsets()) w.u32(off);
      w.raw(col->data());
    } else {
      w.raw(col->values());
    }
  }
}

Bytes encode_batch(const RecordBatch& batch) {
  Bytes out;
  encode_batch_into(batch, out);
  return out;
}

RecordBatch decode_batch(ByteView bytes, const SchemaPtr& schema) {
  try {
    ByteReader r(bytes);
    const std::uint32_t rows = r.u32();
    if (rows == 0 || rows > kMaxBatchRows) bad_batch("row count " + std::to_string(rows) + " outside [1, 1048576]");
    const std::size_t bm = bitmap_bytes(rows);
    std::vector<ColumnPtr> columns;
    columns.reserve(schema->size());
    for (const Field& f : schema->fields()) {
      ColumnParts parts{f.type, rows, {}, {}, {}, {}};
      ByteView validity = r.raw(bm);
      parts.validity.assign(validity.begin(), validity.end());
      if (is_variable_width(f.type)) {
        if (!r.can_read(4 * (static_cast<std::size_t>(rows) + 1))) {
          bad_batch("column '" + f.name + "' offsets truncated");
        }
        parts.offsets.resize(rows + 1);
        for (auto& off : parts.offsets) off = r.u32();
        if (parts.offsets[0] != 0) bad_batch("column '" + f.name + "' offsets[0] != 0");
        for (std::size_t i = 0; i < rows; ++i) {
          if (parts.offsets[i + 1] < parts.offsets[i]) bad_batch("column '" + f.name + "' offsets decrease");
        }
        if (!r.can_read(parts.offsets[rows])) {
          bad_batch("column '" + f.name + "' declares " + std::to_string(parts.offsets[rows]) +
                    " data bytes beyond the payload");
        }
        ByteView data = r.raw(parts.offsets[rows]);
        parts.data.assign(data.begin(), data.end());
      } else {
        const std::size_t n = f.type == DataType::Bool ? bm : fixed_width(f.type) * rows;
        ByteView values = r.raw(n);
        parts.values.assign(values.begin(), values.end());
      }
      Column col = std::move(parts).assemble();
      if (f.type == DataType::Utf8 || f.type == DataType::BlobRef) {
        for (std::size_t i = 0; i < rows; ++i) {
          if (!col.is_valid(i)) continue;
          std::string_view v = col.bytes_at(i);
          if (f.type == DataType::Utf8) {
            if (!is_valid_utf8(v)) bad_batch("column '" + f.name + "' row " + std::to_string(i) + " is not UTF-8");
          } else if (v.size() < 8 || !parse_uri(v.substr(8))) {
            bad_batch("column '" + f.name + "' row " + std::to_string(i) + " is not a blob reference");
          }
        }
      }
      columns.push_back(std::make_shared<const Column>(std::move(col)));
    }
    if (!r.at_end()) bad_batch(std::to_string(r.remaining()) + " trailing bytes");
    return RecordBatch(schema, std::move(columns), rows);
  } catch (const TruncatedInput& t) {
    bad_batch("truncated at byte " + std::to_string(t.position));
  }
}

std::vector<RecordBatch> split_to_fit(const RecordBatch& batch, std::uint32_t frame_cap) {
  std::vector<RecordBatch> out;
  std::vector<RecordBatch> todo{batch};
  while (!todo.empty()) {
    RecordBatch b = std::move(todo.back());
    todo.pop_back();
    // The frame length covers the type byte plus the payload.
    if (b.encoded_size() + 1 <= frame_cap) {
      out.push_back(std::move(b));
      continue;
    }
    if (b.num_rows() <= 1) {
      throw WireError(WireFault::FrameTooLarge,
                      "a single row encodes to " + std::to_string(b.encoded_size()) + " bytes");
    }
    const std::size_t half = b.num_rows() / 2;
    todo.push_back(b.slice(half, b.num_rows() - half));
    todo.push_back(b.slice(0, half));
  }
  return out;
}

}  // namespace dacp::wire
