// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <string>
#include <thread>
#include <vector>

#include "dacp/sdf/column.hpp"
#include "dacp/sdf/frame.hpp"

namespace dacp::testing {

inline void write_text(const std::filesystem::path& p, const std::string& content) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << content;
}

/// CSV with columns id, x (x = id % modulus), label.
inline std::string numbered_csv(std::size_t rows, std::int64_t modulus = 100) {
  std::string s = "id,x,label\n";
  s.reserve(rows * 20);
  for (std::size_t i = 0; i < rows; ++i) {
    s += std::to_string(i) + "," + std::to_string(static_cast<std::int64_t>(i) % modulus) + ",row" +
         std::to_string(i) + "\n";
  }
  return s;
}

/// `batches` one-row batches {seq: int64}, sleeping `period` before each.
inline StreamingDataFrame paced_stream(std::size_t batches, std::chrono::milliseconds period,
                                       std::shared_ptr<std::atomic<std::size_t>> produced = nullptr) {
  auto schema = make_schema({{"seq", DataType::Int64, false}});
  auto next = std::make_shared<std::size_t>(0);
  return StreamingDataFrame::from_function(schema, [=]() -> std::optional<RecordBatch> {
    if (*next >= batches) return std::nullopt;
    std::this_thread::sleep_for(period);
    ColumnBuilder b(DataType::Int64);
    b.append_int64(static_cast<std::int64_t>((*next)++));
    if (produced) ++*produced;
    std::vector<ColumnPtr> cols;
    cols.push_back(std::make_shared<const Column>(b.finish()));
    return RecordBatch(schema, std::move(cols), 1);
  });
}

inline std::vector<Row> drain(StreamingDataFrame sdf) { return sdf.collect_rows(); }

}  // namespace dacp::testing
