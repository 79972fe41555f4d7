// SPDX-License-Identifier: Apache-2.0
#include "dacp/datasource/csv.hpp"

#include <cctype>
#include <charconv>
#include <fstream>

#include "dacp/error.hpp"
#include "dacp/util/crypto.hpp"

namespace fs = std::filesystem;

namespace dacp::datasource {
namespace {

template <typename T>
std::string to_text(T v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

template <typename T>
bool parse_full(std::string_view s, T& out) {
  if (s.empty()) return false;
  const char* begin = s.data();
  if (*begin == '+' && s.size() > 1 && begin[1] != '-') ++begin;
  auto [ptr, ec] = std::from_chars(begin, s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(a[i])) != std::tolower(static_cast<unsigned char>(b[i]))) return false;
  }
  return true;
}

[[noreturn]] void bad_cell(const Field& field, const CsvCell& cell) {
  throw Error::type_error("value '" + cell.text + "' is not a valid " + std::string(type_name(field.type)) +
                          " for column '" + field.name + "'");
}

}  // namespace

std::string csv_cell_text(const Column& c, std::size_t i) {
  switch (c.type()) {
    case DataType::Bool: return c.bool_at(i) ? "true" : "false";
    case DataType::Int32: return to_text(c.int32_at(i));
    case DataType::Int64: return to_text(c.int64_at(i));
    case DataType::Float32: return to_text(c.float32_at(i));
    case DataType::Float64: return to_text(c.float64_at(i));
    case DataType::Utf8: return std::string(c.bytes_at(i));
    case DataType::Binary: return crypto::base64_encode(as_bytes(c.bytes_at(i)));
    case DataType::BlobRef: {
      BlobRef b = c.blob_at(i);
      return std::to_string(b.size_bytes) + " " + b.uri;
    }
  }
  return {};
}

void append_csv_cell(ColumnBuilder& b, const CsvCell& cell, const Field& field) {
  if (cell.is_null()) {
    if (!field.nullable) throw Error::type_error("empty value in non-nullable column '" + field.name + "'");
    b.append_null();
    return;
  }
  const std::string& t = cell.text;
  switch (field.type) {
    case DataType::Bool:
      if (iequals(t, "true")) {
        b.append_bool(true);
      } else if (iequals(t, "false")) {
        b.append_bool(false);
      } else {
        bad_cell(field, cell);
      }
      return;
    case DataType::Int32: {
      std::int32_t v;
      if (!parse_full(t, v)) bad_cell(field, cell);
      b.append_int32(v);
      return;
    }
    case DataType::Int64: {
      std::int64_t v;
      if (!parse_full(t, v)) bad_cell(field, cell);
      b.append_int64(v);
      return;
    }
    case DataType::Float32: {
      float v;
      if (!parse_full(t, v)) bad_cell(field, cell);
      b.append_float32(v);
      return;
    }
    case DataType::Float64: {
      double v;
      if (!parse_full(t, v)) bad_cell(field, cell);
      b.append_float64(v);
      return;
    }
    case DataType::Utf8:
      b.append_bytes(t);
      return;
    case DataType::Binary: {
      Bytes raw;
      if (!crypto::base64_decode(t, raw)) bad_cell(field, cell);
      b.append_bytes(as_chars(raw));
      return;
    }
    case DataType::BlobRef: {
      std::size_t sp = t.find(' ');
      std::uint64_t size;
      if (sp == std::string::npos || !parse_full(std::string_view(t).substr(0, sp), size)) bad_cell(field, cell);
      b.append_blob(std::string_view(t).substr(sp + 1), size);
      return;
    }
  }
}

void CsvWriter::write_cell(const std::string& text, bool force_quote) {
  bool quote = force_quote || text.find_first_of(",\"\r\n") != std::string::npos;
  if (!quote) {
    out_ << text;
    return;
  }
  out_ << '"';
  for (char c : text) {
    if (c == '"') out_ << '"';
    out_ << c;
  }
  out_ << '"';
}

void CsvWriter::write_header(const Schema& schema) {
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (i) out_ << ',';
    write_cell(schema.field(i).name, false);
  }
  out_ << "\r\n";
}

void CsvWriter::write_batch(const RecordBatch& batch) {
  for (std::size_t r = 0; r < batch.num_rows(); ++r) {
    for (std::size_t c = 0; c < batch.num_columns(); ++c) {
      if (c) out_ << ',';
      const Column& col = batch.column(c);
      if (!col.is_valid(r)) continue;
      std::string text = csv_cell_text(col, r);
      write_cell(text, text.empty());
    }
    out_ << "\r\n";
  }
}

fs::path schema_sidecar_path(const fs::path& csv_file) {
  return csv_file.parent_path() / ("." + csv_file.filename().string() + ".schema.json");
}

nlohmann::json schema_to_json(const Schema& schema) {
  nlohmann::json fields = nlohmann::json::array();
  for (const Field& f : schema.fields()) {
    fields.push_back({{"name", f.name}, {"type", type_name(f.type)}, {"nullable", f.nullable}});
  }
  return {{"fields", fields}};
}

Schema schema_from_json(const nlohmann::json& doc) {
  try {
    std::vector<Field> fields;
    for (const auto& item : doc.at("fields")) {
      Field f;
      f.name = item.at("name").get<std::string>();
      auto t = type_from_name(item.at("type").get<std::string>());
      if (!t) throw Error::bad_request("unknown type '" + item.at("type").get<std::string>() + "'");
      f.type = *t;
      f.nullable = item.value("nullable", true);
      fields.push_back(std::move(f));
    }
    return Schema(std::move(fields));
  } catch (const nlohmann::json::exception& e) {
    throw Error::bad_request(std::string("schema document: ") + e.what());
  } catch (const Error& e) {
    throw Error::bad_request(std::string("schema document: ") + e.what());
  }
}

void write_schema_sidecar(const fs::path& file, const Schema& schema) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  out << schema_to_json(schema).dump(2) << "\n";
  if (!out) throw Error::internal("cannot write " + file.string());
}

std::optional<Schema> read_schema_sidecar(const fs::path& file) {
  std::ifstream in(file);
  if (!in) return std::nullopt;
  try {
    return schema_from_json(nlohmann::json::parse(in));
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

}  // namespace dacp::datasource
