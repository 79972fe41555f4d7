// SPDX-License-Identifier: Apache-2.0
#include "dacp/client/render.hpp"

#include <cmath>
#include <json.hpp>
#include <vector>

#include "dacp/datasource/csv.hpp"
#include "dacp/util/crypto.hpp"

namespace dacp::client {
namespace {

std::string json_float(double v) {
  if (std::isnan(v)) return "\"NaN\"";
  if (std::isinf(v)) return v > 0 ? "\"Infinity\"" : "\"-Infinity\"";
  return nlohmann::json(v).dump();
}

class CsvRenderer final : public Renderer {
 public:
  explicit CsvRenderer(std::ostream& out) : out_(out), writer_(out) {}
  void begin(const Schema& schema) override {
    writer_.write_header(schema);
    out_.flush();
  }
  void batch(const RecordBatch& b) override {
    writer_.write_batch(b);
    out_.flush();
  }
  void end() override { out_.flush(); }

 private:
  std::ostream& out_;
  datasource::CsvWriter writer_;
};

class JsonlRenderer final : public Renderer {
 public:
  explicit JsonlRenderer(std::ostream& out) : out_(out) {}
  void begin(const Schema& schema) override {
    keys_.clear();
    for (const auto& f : schema.fields()) keys_.push_back(nlohmann::json(f.name).dump());
  }
  void batch(const RecordBatch& b) override {
    std::string line;
    for (std::size_t r = 0; r < b.num_rows(); ++r) {
      line.clear();
      line.push_back('{');
      for (std::size_t c = 0; c < b.num_columns(); ++c) {
        if (c) line.push_back(',');
        line += keys_[c];
        line.push_back(':');
        line += json_cell(b.column(c), r);
      }
      line += "}\n";
      out_ << line;
    }
    out_.flush();
  }
  void end() override { out_.flush(); }

 private:
  std::ostream& out_;
  std::vector<std::string> keys_;
};

class TableRenderer final : public Renderer {
 public:
  explicit TableRenderer(std::ostream& out) : out_(out) {}
  void begin(const Schema& schema) override {
    header_.clear();
    for (const auto& f : schema.fields()) header_.push_back(f.name);
    widths_.assign(header_.size(), 0);
    for (std::size_t i = 0; i < header_.size(); ++i) widths_[i] = header_[i].size();
  }
  void batch(const RecordBatch& b) override {
    for (std::size_t r = 0; r < b.num_rows(); ++r) {
      std::vector<std::string> cells;
      for (std::size_t c = 0; c < b.num_columns(); ++c) {
        const Column& col = b.column(c);
        std::string text = col.is_valid(r) ? datasource::csv_cell_text(col, r) : "null";
        for (auto& ch : text) {
          if (ch == '\n' || ch == '\r' || ch == '\t') ch = ' ';
        }
        widths_[c] = std::max(widths_[c], text.size());
        cells.push_back(std::move(text));
      }
      rows_.push_back(std::move(cells));
    }
  }
  void end() override {
    print_row(header_);
    std::string rule;
    for (std::size_t i = 0; i < widths_.size(); ++i) {
      if (i) rule += "-+-";
      rule += std::string(widths_[i], '-');
    }
    out_ << rule << "\n";
    for (const auto& r : rows_) print_row(r);
    out_ << "(" << rows_.size() << (rows_.size() == 1 ? " row)\n" : " rows)\n");
    out_.flush();
  }

 private:
  void print_row(const std::vector<std::string>& cells) {
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) line += " | ";
      line += cells[i];
      if (i + 1 < cells.size()) line += std::string(widths_[i] - cells[i].size(), ' ');
    }
    out_ << line << "\n";
  }

  std::ostream& out_;
  std::vector<std::string> header_;
  std::vector<std::size_t> widths_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace

std::optional<OutputFormat> output_format_from_string(std::string_view s) {
  if (s == "csv") return OutputFormat::Csv;
  if (s == "jsonl") return OutputFormat::Jsonl;
  if (s == "table") return OutputFormat::Table;
  return std::nullopt;
}

std::unique_ptr<Renderer> make_renderer(OutputFormat format, std::ostream& out) {
  switch (format) {
    case OutputFormat::Csv: return std::make_unique<CsvRenderer>(out);
    case OutputFormat::Jsonl: return std::make_unique<JsonlRenderer>(out);
    case OutputFormat::Table: return std::make_unique<TableRenderer>(out);
  }
  return nullptr;
}

std::string json_cell(const Column& col, std::size_t row) {
  if (!col.is_valid(row)) return "null";
  switch (col.type()) {
    case DataType::Bool: return col.bool_at(row) ? "true" : "false";
    case DataType::Int32: return std::to_string(col.int32_at(row));
    case DataType::Int64: return std::to_string(col.int64_at(row));
    case DataType::Float32: return json_float(static_cast<double>(col.float32_at(row)));
    case DataType::Float64: return json_float(col.float64_at(row));
    case DataType::Utf8: return nlohmann::json(std::string(col.bytes_at(row))).dump();
    case DataType::Binary: {
      auto v = col.bytes_at(row);
      return nlohmann::json(crypto::base64_encode(as_bytes(v))).dump();
    }
    case DataType::BlobRef: {
      BlobRef b = col.blob_at(row);
      nlohmann::ordered_json o;
      o["uri"] = b.uri;
      o["size_bytes"] = b.size_bytes;
      return o.dump();
    }
  }
  return "null";
}

std::uint64_t render(StreamingDataFrame& data, Renderer& renderer) {
  std::uint64_t rows = 0;
  renderer.begin(data.schema());
  while (auto b = data.next_batch()) {
    renderer.batch(*b);
    rows += b->num_rows();
  }
  renderer.end();
  return rows;
}

}  // namespace dacp::client
