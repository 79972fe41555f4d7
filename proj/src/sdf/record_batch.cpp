// SPDX-License-Identifier: Apache-2.0
#include "dacp/sdf/record_batch.hpp"

#include <bit>

#include "dacp/error.hpp"

namespace dacp {

RecordBatch::RecordBatch(SchemaPtr schema, std::vector<ColumnPtr> columns, std::size_t rows)
    : schema_(std::move(schema)), columns_(std::move(columns)), rows_(rows) {
  if (!schema_) throw Error::internal("record batch without schema");
}

RecordBatch RecordBatch::from_rows(SchemaPtr schema, const std::vector<Row>& rows) {
  std::vector<ColumnPtr> cols;
  cols.reserve(schema->size());
  for (std::size_t c = 0; c < schema->size(); ++c) {
    const Field& f = schema->field(c);
    ColumnBuilder b(f.type, rows.size());
    for (const Row& r : rows) {
      if (r.size() != schema->size()) {
        throw Error::type_error("row has " + std::to_string(r.size()) + " values, schema has " +
                                std::to_string(schema->size()) + " fields");
      }
      if (is_null(r[c]) && !f.nullable) throw Error::type_error("null in non-nullable field '" + f.name + "'");
      try {
        b.append(r[c]);
      } catch (const Error& e) {
        throw Error::type_error("field '" + f.name + "': " + e.what());
      }
    }
    cols.push_back(std::make_shared<const Column>(b.finish()));
  }
  return RecordBatch(std::move(schema), std::move(cols), rows.size());
}

Row RecordBatch::row(std::size_t i) const {
  Row r;
  r.reserve(columns_.size());
  for (const auto& c : columns_) r.push_back(c->value(i));
  return r;
}

std::vector<Row> RecordBatch::to_rows() const {
  std::vector<Row> out;
  out.reserve(rows_);
  for (std::size_t i = 0; i < rows_; ++i) out.push_back(row(i));
  return out;
}

RecordBatch RecordBatch::take(std::span<const std::uint32_t> indices) const {
  std::vector<ColumnPtr> cols;
  cols.reserve(columns_.size());
  for (const auto& c : columns_) cols.push_back(std::make_shared<const Column>(c->take(indices)));
  return RecordBatch(schema_, std::move(cols), indices.size());
}

RecordBatch RecordBatch::slice(std::size_t offset, std::size_t length) const {
  if (offset == 0 && length == rows_) return *this;
  std::vector<ColumnPtr> cols;
  cols.reserve(columns_.size());
  for (const auto& c : columns_) cols.push_back(std::make_shared<const Column>(c->slice(offset, length)));
  return RecordBatch(schema_, std::move(cols), length);
}

RecordBatch RecordBatch::project(SchemaPtr schema, std::span<const std::size_t> indices) const {
  std::vector<ColumnPtr> cols;
  cols.reserve(indices.size());
  for (auto i : indices) cols.push_back(columns_.at(i));
  return RecordBatch(std::move(schema), std::move(cols), rows_);
}

std::size_t RecordBatch::encoded_size() const {
  std::size_t n = 4;
  for (const auto& c : columns_) n += c->encoded_size();
  return n;
}

bool operator==(const RecordBatch& a, const RecordBatch& b) {
  if (a.rows_ != b.rows_ || !(*a.schema_ == *b.schema_) || a.columns_.size() != b.columns_.size()) return false;
  for (std::size_t i = 0; i < a.columns_.size(); ++i) {
    if (!(*a.columns_[i] == *b.columns_[i])) return false;
  }
  return true;
}

Validation validate_batch(const Schema& schema, const RecordBatch& batch) {
  if (!(batch.schema() == schema)) return Validation::bad("batch schema " + batch.schema().to_string() +
                                                          " differs from " + schema.to_string());
  if (batch.num_columns() != schema.size()) {
    return Validation::bad("batch has " + std::to_string(batch.num_columns()) + " columns, schema has " +
                           std::to_string(schema.size()));
  }
  if (batch.num_rows() < 1 || batch.num_rows() > kMaxBatchRows) {
    return Validation::bad("row count " + std::to_string(batch.num_rows()) + " outside [1, 1048576]");
  }
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const Field& f = schema.field(i);
    const Column& c = batch.column(i);
    if (c.type() != f.type) {
      return Validation::bad("column '" + f.name + "' holds " + std::string(type_name(c.type())) +
                             " but field is " + std::string(type_name(f.type)));
    }
    if (c.length() != batch.num_rows()) {
      return Validation::bad("column '" + f.name + "' has " + std::to_string(c.length()) + " rows, batch has " +
                             std::to_string(batch.num_rows()));
    }
    std::size_t present = 0;
    for (auto byte : c.validity()) present += static_cast<std::size_t>(std::popcount(byte));
    if (present != c.length() - c.null_count()) {
      return Validation::bad("column '" + f.name + "' validity bitmap disagrees with its null count");
    }
    if (!f.nullable && c.null_count() != 0) {
      return Validation::bad("column '" + f.name + "' is not nullable but holds " + std::to_string(c.null_count()) +
                             " null(s)");
    }
  }
  return Validation::good();
}

}  // namespace dacp
