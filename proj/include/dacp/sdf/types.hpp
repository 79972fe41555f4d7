// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dacp/util/bytes.hpp"

namespace dacp {

/// Column type palette. The numeric values are the wire tags.
enum class DataType : std::uint8_t {
  Bool = 0x01,
  Int32 = 0x02,
  Int64 = 0x03,
  Float32 = 0x04,
  Float64 = 0x05,
  Utf8 = 0x06,
  Binary = 0x07,
  BlobRef = 0x08,
};

std::optional<DataType> data_type_from_tag(std::uint8_t tag);
std::string_view type_name(DataType t);
std::optional<DataType> type_from_name(std::string_view name);

/// Width in bytes of one fixed-width value; 0 for Bool (bit-packed) and the
/// variable-width types.
std::size_t fixed_width(DataType t);
bool is_variable_width(DataType t);
bool is_numeric(DataType t);
bool is_integral(DataType t);

struct Field {
  std::string name;
  DataType type = DataType::Utf8;
  bool nullable = false;

  friend bool operator==(const Field&, const Field&) = default;
};

/// True when `name` is usable as a column name: non-empty, valid UTF-8,
/// no NUL and no '/'.
bool is_valid_field_name(std::string_view name);

inline constexpr std::size_t kMaxFields = 4096;

/// Ordered, validated list of fields. Immutable once constructed.
class Schema {
 public:
  /// Throws Error(TypeError) when the field list breaks an invariant.
  explicit Schema(std::vector<Field> fields);

  const std::vector<Field>& fields() const { return fields_; }
  std::size_t size() const { return fields_.size(); }
  const Field& field(std::size_t i) const { return fields_.at(i); }
  std::optional<std::size_t> index_of(std::string_view name) const;

  std::string to_string() const;

  friend bool operator==(const Schema& a, const Schema& b) { return a.fields_ == b.fields_; }

 private:
  std::vector<Field> fields_;
};

using SchemaPtr = std::shared_ptr<const Schema>;

inline SchemaPtr make_schema(std::vector<Field> fields) {
  return std::make_shared<const Schema>(std::move(fields));
}

struct BlobRef {
  std::string uri;
  std::uint64_t size_bytes = 0;

  friend bool operator==(const BlobRef&, const BlobRef&) = default;
};

/// Owned byte string for the Binary type; distinct from text.
struct Binary {
  std::string bytes;

  friend bool operator==(const Binary&, const Binary&) = default;
};

/// A single cell. Alternative order follows the DataType tags, with
/// std::monostate standing for Null.
using Value = std::variant<std::monostate, bool, std::int32_t, std::int64_t, float, double,
                           std::string, Binary, BlobRef>;

using Row = std::vector<Value>;

inline bool is_null(const Value& v) { return std::holds_alternative<std::monostate>(v); }

/// The DataType a non-null value belongs to.
DataType value_type(const Value& v);

/// Equality that treats floating-point values bitwise (so NaN == NaN and
/// 0.0 != -0.0). Used wherever "value-exact" comparison is meant.
bool same_value(const Value& a, const Value& b);
bool same_row(const Row& a, const Row& b);

std::string value_to_string(const Value& v);

}  // namespace dacp
