// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "dacp/sdf/column.hpp"
#include "dacp/sdf/types.hpp"

namespace dacp {

inline constexpr std::size_t kMaxBatchRows = 1'048'576;

/// Equal-length columns under a shared schema. Immutable. In-memory batches
/// may be empty (operators produce them); streams never yield empty batches.
class RecordBatch {
 public:
  RecordBatch(SchemaPtr schema, std::vector<ColumnPtr> columns, std::size_t rows);

  /// Builds from row-major values. Throws Error(TypeError) on mismatch.
  static RecordBatch from_rows(SchemaPtr schema, const std::vector<Row>& rows);

  const Schema& schema() const { return *schema_; }
  const SchemaPtr& schema_ptr() const { return schema_; }
  std::size_t num_rows() const { return rows_; }
  std::size_t num_columns() const { return columns_.size(); }
  const Column& column(std::size_t i) const { return *columns_.at(i); }
  const ColumnPtr& column_ptr(std::size_t i) const { return columns_.at(i); }
  const std::vector<ColumnPtr>& columns() const { return columns_; }

  Row row(std::size_t i) const;
  std::vector<Row> to_rows() const;

  RecordBatch take(std::span<const std::uint32_t> indices) const;
  RecordBatch slice(std::size_t offset, std::size_t length) const;
  /// Columns at `indices`, under `schema` (which must describe them).
  RecordBatch project(SchemaPtr schema, std::span<const std::size_t> indices) const;

  /// Exact size of the encoded batch body (row count header included).
  std::size_t encoded_size() const;

  friend bool operator==(const RecordBatch& a, const RecordBatch& b);

 private:
  SchemaPtr schema_;
  std::vector<ColumnPtr> columns_;
  std::size_t rows_;
};

/// Result of validate_batch. `ok()` when every batch invariant holds;
/// otherwise `detail` names the first offending column.
struct Validation {
  bool valid = true;
  std::string detail;

  bool ok() const { return valid; }
  static Validation good() { return {}; }
  static Validation bad(std::string d) { return {false, std::move(d)}; }
};

/// Checks a batch against a schema: column count, per-column type and
/// length, nullability, the validity popcount, and the row-count bounds.
Validation validate_batch(const Schema& schema, const RecordBatch& batch);

}  // namespace dacp
