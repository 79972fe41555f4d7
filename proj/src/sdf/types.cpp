// SPDX-License-Identifier: Apache-2.0
#include "dacp/sdf/types.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <unordered_set>

#include "dacp/error.hpp"
#include "dacp/util/utf8.hpp"

namespace dacp {

std::optional<DataType> data_type_from_tag(std::uint8_t tag) {
  if (tag >= 0x01 && tag <= 0x08) return static_cast<DataType>(tag);
  return std::nullopt;
}

std::string_view type_name(DataType t) {
  switch (t) {
    case DataType::Bool: return "bool";
    case DataType::Int32: return "int32";
    case DataType::Int64: return "int64";
    case DataType::Float32: return "float32";
    case DataType::Float64: return "float64";
    case DataType::Utf8: return "utf8";
    case DataType::Binary: return "binary";
    case DataType::BlobRef: return "blobref";
  }
  return "?";
}

std::optional<DataType> type_from_name(std::string_view name) {
  for (std::uint8_t tag = 1; tag <= 8; ++tag) {
    auto t = static_cast<DataType>(tag);
    if (type_name(t) == name) return t;
  }
  return std::nullopt;
}

std::size_t fixed_width(DataType t) {
  switch (t) {
    case DataType::Int32:
    case DataType::Float32: return 4;
    case DataType::Int64:
    case DataType::Float64: return 8;
    default: return 0;
  }
}

bool is_variable_width(DataType t) {
  return t == DataType::Utf8 || t == DataType::Binary || t == DataType::BlobRef;
}

bool is_numeric(DataType t) {
  return t == DataType::Int32 || t == DataType::Int64 || t == DataType::Float32 || t == DataType::Float64;
}

bool is_integral(DataType t) { return t == DataType::Int32 || t == DataType::Int64; }

bool is_valid_field_name(std::string_view name) {
  return !name.empty() && name.find('\0') == std::string_view::npos &&
         name.find('/') == std::string_view::npos && is_valid_utf8(name);
}

Schema::Schema(std::vector<Field> fields) : fields_(std::move(fields)) {
  if (fields_.empty()) throw Error::type_error("schema must have at least one field");
  if (fields_.size() > kMaxFields) {
    throw Error::type_error("schema has " + std::to_string(fields_.size()) + " fields (max 4096)");
  }
  std::unordered_set<std::string_view> seen;
  for (const auto& f : fields_) {
    if (!is_valid_field_name(f.name)) throw Error::type_error("invalid field name '" + f.name + "'");
    if (!data_type_from_tag(static_cast<std::uint8_t>(f.type))) {
      throw Error::type_error("field '" + f.name + "' has an unknown type tag");
    }
    if (!seen.insert(f.name).second) throw Error::type_error("duplicate field name '" + f.name + "'");
  }
}

std::optional<std::size_t> Schema::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < fields_.size(); ++i) {
    if (fields_[i].name == name) return i;
  }
  return std::nullopt;
}

std::string Schema::to_string() const {
  std::string out = "{";
  for (std::size_t i = 0; i < fields_.size(); ++i) {
    if (i) out += ", ";
    out += fields_[i].name + ": " + std::string(type_name(fields_[i].type));
    if (fields_[i].nullable) out += "?";
  }
  return out + "}";
}

DataType value_type(const Value& v) {
  switch (v.index()) {
    case 1: return DataType::Bool;
    case 2: return DataType::Int32;
    case 3: return DataType::Int64;
    case 4: return DataType::Float32;
    case 5: return DataType::Float64;
    case 6: return DataType::Utf8;
    case 7: return DataType::Binary;
    case 8: return DataType::BlobRef;
    default: throw Error::internal("value_type of Null");
  }
}

bool same_value(const Value& a, const Value& b) {
  if (a.index() != b.index()) return false;
  if (const auto* f = std::get_if<float>(&a)) {
    return std::bit_cast<std::uint32_t>(*f) == std::bit_cast<std::uint32_t>(std::get<float>(b));
  }
  if (const auto* d = std::get_if<double>(&a)) {
    return std::bit_cast<std::uint64_t>(*d) == std::bit_cast<std::uint64_t>(std::get<double>(b));
  }
  return a == b;
}

bool same_row(const Row& a, const Row& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!same_value(a[i], b[i])) return false;
  }
  return true;
}

namespace {

template <typename T>
std::string chars(T v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string value_to_string(const Value& v) {
  switch (v.index()) {
    case 0: return "null";
    case 1: return std::get<bool>(v) ? "true" : "false";
    case 2: return chars(std::get<std::int32_t>(v));
    case 3: return chars(std::get<std::int64_t>(v));
    case 4: return chars(std::get<float>(v));
    case 5: return chars(std::get<double>(v));
    case 6: return std::get<std::string>(v);
    case 7: return "<" + std::to_string(std::get<Binary>(v).bytes.size()) + " bytes>";
    case 8: {
      const auto& b = std::get<BlobRef>(v);
      return b.uri + " (" + std::to_string(b.size_bytes) + " bytes)";
    }
  }
  return "?";
}

}  // namespace dacp
