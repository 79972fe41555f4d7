// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "dacp/sdf/types.hpp"

namespace dacp {

/// Immutable typed column held in its wire layout:
///  - validity: ceil(n/8) bytes, LSB-first, 1 = present, pad bits zero
///  - fixed-width types: n little-endian values, zero in null slots
///  - Bool: ceil(n/8)-byte bitmap
///  - Utf8/Binary/BlobRef: n+1 u32 offsets plus the value bytes; null
///    slots are zero-length. BlobRef values are [size u64 LE][uri].
class Column {
 public:
  Column() = default;

  DataType type() const { return type_; }
  std::size_t length() const { return length_; }
  std::size_t null_count() const { return null_count_; }

  bool is_valid(std::size_t i) const { return (validity_[i >> 3] >> (i & 7)) & 1; }

  bool bool_at(std::size_t i) const { return (values_[i >> 3] >> (i & 7)) & 1; }
  std::int32_t int32_at(std::size_t i) const;
  std::int64_t int64_at(std::size_t i) const;
  float float32_at(std::size_t i) const;
  double float64_at(std::size_t i) const;
  /// Raw bytes of a variable-width value.
  std::string_view bytes_at(std::size_t i) const;
  BlobRef blob_at(std::size_t i) const;

  /// Numeric cell widened to double / int64 (Int32, Int64, Float32, Float64).
  double numeric_as_double(std::size_t i) const;
  std::int64_t integral_as_int64(std::size_t i) const;

  Value value(std::size_t i) const;

  std::span<const std::uint8_t> validity() const { return validity_; }
  std::span<const std::uint8_t> values() const { return values_; }
  std::span<const std::uint32_t> offsets() const { return offsets_; }
  std::span<const std::uint8_t> data() const { return data_; }

  /// Rows at `indices`, in that order.
  Column take(std::span<const std::uint32_t> indices) const;
  Column slice(std::size_t offset, std::size_t length) const;

  /// Exact number of bytes this column occupies in an encoded batch.
  std::size_t encoded_size() const;

  friend bool operator==(const Column& a, const Column& b);

 private:
  friend class ColumnBuilder;
  friend struct ColumnParts;

  DataType type_ = DataType::Int64;
  std::size_t length_ = 0;
  std::size_t null_count_ = 0;
  std::vector<std::uint8_t> validity_;
  std::vector<std::uint8_t> values_;
  std::vector<std::uint32_t> offsets_{0};
  std::vector<std::uint8_t> data_;
};

using ColumnPtr = std::shared_ptr<const Column>;

/// Raw buffers handed to ColumnParts::assemble by the batch decoder. The
/// assembled column is normalised to canonical form.
struct ColumnParts {
  DataType type;
  std::size_t length;
  std::vector<std::uint8_t> validity;
  std::vector<std::uint8_t> values;
  std::vector<std::uint32_t> offsets;
  std::vector<std::uint8_t> data;

  /// Zeroes pad bits and null slots, compacts variable-width data so null
  /// rows are zero-length. Does not validate offsets; callers must have.
  Column assemble() &&;
};

/// Appends values to build a Column. Type-checks every append.
class ColumnBuilder {
 public:
  explicit ColumnBuilder(DataType type, std::size_t reserve = 0);

  DataType type() const { return col_.type_; }
  std::size_t length() const { return col_.length_; }

  void append_null();
  void append_bool(bool v);
  void append_int32(std::int32_t v);
  void append_int64(std::int64_t v);
  void append_float32(float v);
  void append_float64(double v);
  /// Utf8 (validated) or Binary payload.
  void append_bytes(std::string_view v);
  void append_blob(std::string_view uri, std::uint64_t size_bytes);
  /// Throws Error(TypeError) when `v` does not belong to this column type.
  void append(const Value& v);
  /// Copies row `i` of `src`, which must share this builder's type.
  void append_from(const Column& src, std::size_t i);

  Column finish();

 private:
  void push_validity(bool present);
  void grow_values(std::size_t bytes);

  Column col_;
};

}  // namespace dacp
