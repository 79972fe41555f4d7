// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <optional>
#include <ostream>
#include <string_view>

#include "dacp/sdf/frame.hpp"

namespace dacp::client {

enum class OutputFormat { Csv, Jsonl, Table };

std::optional<OutputFormat> output_format_from_string(std::string_view s);

/// Writes a stream batch by batch. CSV and JSONL flush after every batch;
/// the table renderer aligns columns and so prints at end().
class Renderer {
 public:
  virtual ~Renderer() = default;
  virtual void begin(const Schema& schema) = 0;
  virtual void batch(const RecordBatch& batch) = 0;
  virtual void end() = 0;
};

std::unique_ptr<Renderer> make_renderer(OutputFormat format, std::ostream& out);

/// JSON text for one cell: null, numbers, strings, base64 for binary and
/// {"uri", "size_bytes"} for blob references. Non-finite floats become the
/// strings "NaN", "Infinity", "-Infinity".
std::string json_cell(const Column& column, std::size_t row);

/// Drains `data` into `renderer`; returns the row count.
std::uint64_t render(StreamingDataFrame& data, Renderer& renderer);

}  // namespace dacp::client
