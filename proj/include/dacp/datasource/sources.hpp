// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <memory>

#include "dacp/datasource/registry.hpp"
#include "dacp/sdf/frame.hpp"

namespace dacp::datasource {

/// Counters shared by every stream a data source opens. Tests use them to
/// check laziness and read volume.
struct SourceStats {
  std::atomic<std::uint64_t> opens{0};
  std::atomic<std::uint64_t> batches_produced{0};
  std::atomic<std::uint64_t> rows_produced{0};
  std::atomic<std::uint64_t> bytes_read{0};

  void reset() {
    opens = 0;
    batches_produced = 0;
    rows_produced = 0;
    bytes_read = 0;
  }
};

inline constexpr std::size_t kDefaultChunkSize = 1u << 20;
inline constexpr std::size_t kCsvSampleRows = 1000;

struct OpenOptions {
  std::size_t batch_rows = kDefaultBatchRows;
  std::size_t chunk_size = kDefaultChunkSize;
  /// Rows per batch for binary chunk streams; keeps batches under the frame cap.
  std::size_t chunks_per_batch = 8;
  std::shared_ptr<SourceStats> stats;
};

/// CSV with a header row. Uses the schema sidecar written by PUT when one is
/// present; otherwise infers the schema from the first 1000 data rows.
StreamingDataFrame open_csv(const std::filesystem::path& file, const OpenOptions& options = {});
StreamingDataFrame open_csv(const ResolvedResource& resource, const OpenOptions& options = {});

/// File list: one row per direct child (hidden entries skipped), sorted by
/// name, content column holding blob references.
StreamingDataFrame open_directory(const ResolvedResource& resource, const OpenOptions& options = {});

/// Schema {chunk_index: int64, data: binary}.
StreamingDataFrame open_binary(const std::filesystem::path& file, const OpenOptions& options = {});
StreamingDataFrame open_binary(const ResolvedResource& resource, const OpenOptions& options = {});

/// Dispatches on resource kind.
StreamingDataFrame open_resource(const ResolvedResource& resource, const OpenOptions& options = {});

/// Opens what a blob reference points at: resolve + open_resource.
StreamingDataFrame expand_blob(const BlobRef& blob, const DatasetRegistry& registry,
                               const OpenOptions& options = {});

/// The fixed file-list schema.
SchemaPtr file_list_schema();
SchemaPtr binary_chunk_schema();

}  // namespace dacp::datasource
