// SPDX-License-Identifier: Apache-2.0
#include "dacp/sdf/column.hpp"

#include <bit>
#include <cstring>

#include "dacp/error.hpp"
#include "dacp/uri.hpp"
#include "dacp/util/bytes.hpp"
#include "dacp/util/utf8.hpp"

namespace dacp {
namespace {

std::size_t bitmap_bytes(std::size_t n) { return (n + 7) / 8; }

void set_bit(std::vector<std::uint8_t>& bm, std::size_t i, bool v) {
  if (v) bm[i >> 3] |= static_cast<std::uint8_t>(1u << (i & 7));
}

}  // namespace

std::int32_t Column::int32_at(std::size_t i) const {
  return static_cast<std::int32_t>(load_u32_le(values_.data() + 4 * i));
}

std::int64_t Column::int64_at(std::size_t i) const {
  return static_cast<std::int64_t>(load_u64_le(values_.data() + 8 * i));
}

float Column::float32_at(std::size_t i) const {
  return std::bit_cast<float>(load_u32_le(values_.data() + 4 * i));
}

double Column::float64_at(std::size_t i) const {
  return std::bit_cast<double>(load_u64_le(values_.data() + 8 * i));
}

std::string_view Column::bytes_at(std::size_t i) const {
  const auto begin = offsets_[i];
  const auto end = offsets_[i + 1];
  return {reinterpret_cast<const char*>(data_.data()) + begin, end - begin};
}

BlobRef Column::blob_at(std::size_t i) const {
  std::string_view raw = bytes_at(i);
  if (raw.size() < 8) return {};
  BlobRef b;
  b.size_bytes = load_u64_le(reinterpret_cast<const std::uint8_t*>(raw.data()));
  b.uri = std::string(raw.substr(8));
  return b;
}

double Column::numeric_as_double(std::size_t i) const {
  switch (type_) {
    case DataType::Int32: return static_cast<double>(int32_at(i));
    case DataType::Int64: return static_cast<double>(int64_at(i));
    case DataType::Float32: return static_cast<double>(float32_at(i));
    case DataType::Float64: return float64_at(i);
    default: throw Error::internal("numeric access on non-numeric column");
  }
}

std::int64_t Column::integral_as_int64(std::size_t i) const {
  switch (type_) {
    case DataType::Int32: return int32_at(i);
    case DataType::Int64: return int64_at(i);
    default: throw Error::internal("integral access on non-integral column");
  }
}

Value Column::value(std::size_t i) const {
  if (!is_valid(i)) return std::monostate{};
  switch (type_) {
    case DataType::Bool: return bool_at(i);
    case DataType::Int32: return int32_at(i);
    case DataType::Int64: return int64_at(i);
    case DataType::Float32: return float32_at(i);
    case DataType::Float64: return float64_at(i);
    case DataType::Utf8: return std::string(bytes_at(i));
    case DataType::Binary: return Binary{std::string(bytes_at(i))};
    case DataType::BlobRef: return blob_at(i);
  }
  return std::monostate{};
}

Column Column::take(std::span<const std::uint32_t> indices) const {
  ColumnBuilder b(type_, indices.size());
  for (auto i : indices) b.append_from(*this, i);
  return b.finish();
}

Column Column::slice(std::size_t offset, std::size_t length) const {
  ColumnBuilder b(type_, length);
  for (std::size_t i = offset; i < offset + length; ++i) b.append_from(*this, i);
  return b.finish();
}

std::size_t Column::encoded_size() const {
  std::size_t n = bitmap_bytes(length_);
  if (type_ == DataType::Bool) return n + bitmap_bytes(length_);
  if (is_variable_width(type_)) return n + 4 * (length_ + 1) + data_.size();
  return n + fixed_width(type_) * length_;
}

bool operator==(const Column& a, const Column& b) {
  return a.type_ == b.type_ && a.length_ == b.length_ && a.validity_ == b.validity_ &&
         a.values_ == b.values_ && a.offsets_ == b.offsets_ && a.data_ == b.data_;
}

Column ColumnParts::assemble() && {
  Column c;
  c.type_ = type;
  c.length_ = length;
  c.validity_ = std::move(validity);
  c.validity_.resize(bitmap_bytes(length), 0);
  if (length % 8 != 0 && !c.validity_.empty()) {
    c.validity_.back() &= static_cast<std::uint8_t>((1u << (length % 8)) - 1);
  }
  std::size_t present = 0;
  for (auto byte : c.validity_) present += static_cast<std::size_t>(std::popcount(byte));
  c.null_count_ = length - present;

  if (is_variable_width(type)) {
    if (c.null_count_ == 0) {
      c.offsets_ = std::move(offsets);
      c.data_ = std::move(data);
    } else {
      // Drop bytes attached to null rows.
      c.offsets_.assign(1, 0);
      c.offsets_.reserve(length + 1);
      c.data_.reserve(data.size());
      for (std::size_t i = 0; i < length; ++i) {
        if (c.is_valid(i)) {
          c.data_.insert(c.data_.end(), data.begin() + offsets[i], data.begin() + offsets[i + 1]);
        }
        c.offsets_.push_back(static_cast<std::uint32_t>(c.data_.size()));
      }
    }
    if (c.data_.size() != c.offsets_.back()) c.data_.resize(c.offsets_.back());
    return c;
  }

  c.values_ = std::move(values);
  if (type == DataType::Bool) {
    c.values_.resize(bitmap_bytes(length), 0);
    for (std::size_t i = 0; i < c.values_.size(); ++i) c.values_[i] &= c.validity_[i];
    return c;
  }
  const std::size_t w = fixed_width(type);
  c.values_.resize(w * length, 0);
  if (c.null_count_ != 0) {
    for (std::size_t i = 0; i < length; ++i) {
      if (!c.is_valid(i)) std::memset(c.values_.data() + w * i, 0, w);
    }
  }
  return c;
}

ColumnBuilder::ColumnBuilder(DataType type, std::size_t reserve) {
  col_.type_ = type;
  col_.validity_.reserve(bitmap_bytes(reserve));
  if (is_variable_width(type)) {
    col_.offsets_.reserve(reserve + 1);
  } else if (type != DataType::Bool) {
    col_.values_.reserve(fixed_width(type) * reserve);
  }
}

void ColumnBuilder::push_validity(bool present) {
  const std::size_t i = col_.length_;
  if ((i & 7) == 0) {
    col_.validity_.push_back(0);
    if (col_.type_ == DataType::Bool) col_.values_.push_back(0);
  }
  set_bit(col_.validity_, i, present);
  if (!present) ++col_.null_count_;
  ++col_.length_;
}

void ColumnBuilder::grow_values(std::size_t bytes) { col_.values_.resize(col_.values_.size() + bytes, 0); }

void ColumnBuilder::append_null() {
  push_validity(false);
  if (is_variable_width(col_.type_)) {
    col_.offsets_.push_back(static_cast<std::uint32_t>(col_.data_.size()));
  } else if (col_.type_ != DataType::Bool) {
    grow_values(fixed_width(col_.type_));
  }
}

void ColumnBuilder::append_bool(bool v) {
  if (col_.type_ != DataType::Bool) throw Error::type_error("bool value in " + std::string(type_name(col_.type_)) + " column");
  const std::size_t i = col_.length_;
  push_validity(true);
  set_bit(col_.values_, i, v);
}

void ColumnBuilder::append_int32(std::int32_t v) {
  if (col_.type_ != DataType::Int32) throw Error::type_error("int32 value in " + std::string(type_name(col_.type_)) + " column");
  push_validity(true);
  grow_values(4);
  store_u32_le(col_.values_.data() + col_.values_.size() - 4, static_cast<std::uint32_t>(v));
}

void ColumnBuilder::append_int64(std::int64_t v) {
  if (col_.type_ != DataType::Int64) throw Error::type_error("int64 value in " + std::string(type_name(col_.type_)) + " column");
  push_validity(true);
  grow_values(8);
  store_u64_le(col_.values_.data() + col_.values_.size() - 8, static_cast<std::uint64_t>(v));
}

void ColumnBuilder::append_float32(float v) {
  if (col_.type_ != DataType::Float32) throw Error::type_error("float32 value in " + std::string(type_name(col_.type_)) + " column");
  push_validity(true);
  grow_values(4);
  store_u32_le(col_.values_.data() + col_.values_.size() - 4, std::bit_cast<std::uint32_t>(v));
}

void ColumnBuilder::append_float64(double v) {
  if (col_.type_ != DataType::Float64) throw Error::type_error("float64 value in " + std::string(type_name(col_.type_)) + " column");
  push_validity(true);
  grow_values(8);
  store_u64_le(col_.values_.data() + col_.values_.size() - 8, std::bit_cast<std::uint64_t>(v));
}

void ColumnBuilder::append_bytes(std::string_view v) {
  if (col_.type_ != DataType::Utf8 && col_.type_ != DataType::Binary) {
    throw Error::type_error("byte value in " + std::string(type_name(col_.type_)) + " column");
  }
  if (col_.type_ == DataType::Utf8 && !is_valid_utf8(v)) throw Error::type_error("invalid UTF-8 in utf8 column");
  if (col_.data_.size() + v.size() > UINT32_MAX) throw Error::type_error("variable-width column exceeds 4 GiB");
  push_validity(true);
  col_.data_.insert(col_.data_.end(), v.begin(), v.end());
  col_.offsets_.push_back(static_cast<std::uint32_t>(col_.data_.size()));
}

void ColumnBuilder::append_blob(std::string_view uri, std::uint64_t size_bytes) {
  if (col_.type_ != DataType::BlobRef) throw Error::type_error("blob reference in " + std::string(type_name(col_.type_)) + " column");
  if (!parse_uri(uri)) throw Error::type_error("blob reference URI is not a dacp URI: '" + std::string(uri) + "'");
  push_validity(true);
  std::uint8_t size_le[8];
  store_u64_le(size_le, size_bytes);
  col_.data_.insert(col_.data_.end(), size_le, size_le + 8);
  col_.data_.insert(col_.data_.end(), uri.begin(), uri.end());
  col_.offsets_.push_back(static_cast<std::uint32_t>(col_.data_.size()));
}

void ColumnBuilder::append(const Value& v) {
  switch (v.index()) {
    case 0: append_null(); break;
    case 1: append_bool(std::get<bool>(v)); break;
    case 2: append_int32(std::get<std::int32_t>(v)); break;
    case 3: append_int64(std::get<std::int64_t>(v)); break;
    case 4: append_float32(std::get<float>(v)); break;
    case 5: append_float64(std::get<double>(v)); break;
    case 6:
      if (col_.type_ != DataType::Utf8) throw Error::type_error("utf8 value in " + std::string(type_name(col_.type_)) + " column");
      append_bytes(std::get<std::string>(v));
      break;
    case 7:
      if (col_.type_ != DataType::Binary) throw Error::type_error("binary value in " + std::string(type_name(col_.type_)) + " column");
      append_bytes(std::get<Binary>(v).bytes);
      break;
    case 8: {
      const auto& b = std::get<BlobRef>(v);
      append_blob(b.uri, b.size_bytes);
      break;
    }
  }
}

void ColumnBuilder::append_from(const Column& src, std::size_t i) {
  if (src.type() != col_.type_) throw Error::internal("append_from type mismatch");
  if (!src.is_valid(i)) {
    append_null();
    return;
  }
  if (is_variable_width(col_.type_)) {
    std::string_view v = src.bytes_at(i);
    push_validity(true);
    col_.data_.insert(col_.data_.end(), v.begin(), v.end());
    col_.offsets_.push_back(static_cast<std::uint32_t>(col_.data_.size()));
  } else if (col_.type_ == DataType::Bool) {
    const std::size_t at = col_.length_;
    push_validity(true);
    set_bit(col_.values_, at, src.bool_at(i));
  } else {
    const std::size_t w = fixed_width(col_.type_);
    push_validity(true);
    const auto* p = src.values().data() + w * i;
    col_.values_.insert(col_.values_.end(), p, p + w);
  }
}

Column ColumnBuilder::finish() {
  Column out = std::move(col_);
  col_ = Column{};
  col_.type_ = out.type_;
  return out;
}

}  // namespace dacp
