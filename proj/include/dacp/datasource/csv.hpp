// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dacp/sdf/record_batch.hpp"

namespace dacp::datasource {

/// One parsed CSV cell. An unquoted empty cell is a null; a quoted empty
/// cell ("") is an empty string.
struct CsvCell {
  std::string text;
  bool quoted = false;

  bool is_null() const { return text.empty() && !quoted; }
};

/// Text rendering used for CSV cells of each type. Floats use the shortest
/// representation that round-trips; Binary is base64; BlobRef is
/// "<size> <uri>".
std::string csv_cell_text(const Column& column, std::size_t row);

/// Parses one cell under a declared type. Throws Error(TypeError).
void append_csv_cell(ColumnBuilder& builder, const CsvCell& cell, const Field& field);

/// RFC-4180 writer. Quotes cells containing separators, quotes or CR/LF,
/// and writes non-null empty text as "".
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}

  void write_header(const Schema& schema);
  void write_batch(const RecordBatch& batch);

 private:
  void write_cell(const std::string& text, bool force_quote);
  std::ostream& out_;
};

/// Location of the schema sidecar for a CSV file: ".<name>.schema.json" in
/// the same directory.
std::filesystem::path schema_sidecar_path(const std::filesystem::path& csv_file);
/// Writes the schema document to `sidecar` (a path from schema_sidecar_path).
void write_schema_sidecar(const std::filesystem::path& sidecar, const Schema& schema);
std::optional<Schema> read_schema_sidecar(const std::filesystem::path& file);

nlohmann::json schema_to_json(const Schema& schema);
/// Throws Error(BadRequest).
Schema schema_from_json(const nlohmann::json& doc);

}  // namespace dacp::datasource
