// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <iterator>
#include <memory>
#include <optional>
#include <vector>

#include "dacp/error.hpp"
#include "dacp/sdf/record_batch.hpp"

namespace dacp {

inline constexpr std::size_t kDefaultBatchRows = 4096;

/// Upstream of a StreamingDataFrame. produce() is called only when the
/// consumer pulls; it returns nullopt at end of stream and reports failure
/// by throwing dacp::Error.
class BatchProducer {
 public:
  virtual ~BatchProducer() = default;
  virtual std::optional<RecordBatch> produce() = 0;
};

/// Adapts a callable to BatchProducer.
class FunctionProducer final : public BatchProducer {
 public:
  explicit FunctionProducer(std::function<std::optional<RecordBatch>()> fn) : fn_(std::move(fn)) {}
  std::optional<RecordBatch> produce() override { return fn_(); }

 private:
  std::function<std::optional<RecordBatch>()> fn_;
};

/// A schema plus a lazily produced, single-consumption sequence of record
/// batches.
///
/// Every yielded batch is validated against the schema. Once end of stream
/// has been observed every further pull returns end of stream. A producer
/// failure poisons the stream: the same error is rethrown on every later
/// pull. Consumption is either batch-wise or row-wise; starting row
/// iteration on a stream that has already been pulled is an error.
class StreamingDataFrame {
 public:
  StreamingDataFrame(SchemaPtr schema, std::unique_ptr<BatchProducer> producer);

  StreamingDataFrame(StreamingDataFrame&&) noexcept = default;
  StreamingDataFrame& operator=(StreamingDataFrame&&) noexcept = default;
  StreamingDataFrame(const StreamingDataFrame&) = delete;
  StreamingDataFrame& operator=(const StreamingDataFrame&) = delete;

  /// In-memory stream over the given batches (empty ones are skipped).
  static StreamingDataFrame from_batches(SchemaPtr schema, std::vector<RecordBatch> batches);
  /// Splits `rows` into batches of `batch_rows`.
  static StreamingDataFrame from_rows(SchemaPtr schema, const std::vector<Row>& rows,
                                      std::size_t batch_rows = kDefaultBatchRows);
  static StreamingDataFrame from_function(SchemaPtr schema,
                                          std::function<std::optional<RecordBatch>()> fn);

  const Schema& schema() const { return *schema_; }
  const SchemaPtr& schema_ptr() const { return schema_; }
  bool exhausted() const { return state_ == State::Exhausted; }
  bool poisoned() const { return static_cast<bool>(error_); }
  /// Number of batches handed to the consumer so far.
  std::size_t batches_yielded() const { return batches_yielded_; }

  /// Next non-empty batch, or nullopt at end of stream.
  std::optional<RecordBatch> next_batch();

  /// Next row; the first call switches the stream into row mode and fails
  /// with BadRequest if batches were already pulled.
  std::optional<Row> next_row();

  class RowIterator {
   public:
    using iterator_category = std::input_iterator_tag;
    using value_type = Row;
    using difference_type = std::ptrdiff_t;
    using pointer = const Row*;
    using reference = const Row&;

    RowIterator() = default;
    explicit RowIterator(StreamingDataFrame* sdf) : sdf_(sdf) { advance(); }

    const Row& operator*() const { return current_; }
    const Row* operator->() const { return &current_; }
    RowIterator& operator++() {
      advance();
      return *this;
    }
    void operator++(int) { advance(); }
    friend bool operator==(const RowIterator& it, std::default_sentinel_t) { return it.sdf_ == nullptr; }

   private:
    void advance();
    StreamingDataFrame* sdf_ = nullptr;
    Row current_;
  };

  class RowRange {
   public:
    explicit RowRange(StreamingDataFrame* sdf) : sdf_(sdf) {}
    RowIterator begin() { return RowIterator(sdf_); }
    std::default_sentinel_t end() { return {}; }

   private:
    StreamingDataFrame* sdf_;
  };

  /// Row-wise iteration; pulls batches only as rows are consumed.
  RowRange rows();

  /// Drains the remaining stream.
  std::vector<RecordBatch> collect_batches();
  std::vector<Row> collect_rows();

 private:
  enum class State { Fresh, Streaming, Exhausted };
  enum class Mode { Unset, Batches, Rows };

  void claim(Mode mode);
  std::optional<RecordBatch> pull();

  SchemaPtr schema_;
  std::unique_ptr<BatchProducer> producer_;
  State state_ = State::Fresh;
  Mode mode_ = Mode::Unset;
  std::exception_ptr error_;
  std::size_t batches_yielded_ = 0;

  std::optional<RecordBatch> row_batch_;
  std::size_t row_pos_ = 0;
};

}  // namespace dacp
