// SPDX-License-Identifier: Apache-2.0
#include "dacp/sdf/frame.hpp"

#include <algorithm>

namespace dacp {

StreamingDataFrame::StreamingDataFrame(SchemaPtr schema, std::unique_ptr<BatchProducer> producer)
    : schema_(std::move(schema)), producer_(std::move(producer)) {
  if (!schema_) throw Error::internal("streaming data frame without schema");
}

StreamingDataFrame StreamingDataFrame::from_batches(SchemaPtr schema, std::vector<RecordBatch> batches) {
  auto queue = std::make_shared<std::vector<RecordBatch>>(std::move(batches));
  std::size_t next = 0;
  return from_function(std::move(schema), [queue, next]() mutable -> std::optional<RecordBatch> {
    if (next >= queue->size()) return std::nullopt;
    return std::move((*queue)[next++]);
  });
}

StreamingDataFrame StreamingDataFrame::from_rows(SchemaPtr schema, const std::vector<Row>& rows,
                                                 std::size_t batch_rows) {
  std::vector<RecordBatch> batches;
  for (std::size_t at = 0; at < rows.size(); at += batch_rows) {
    std::size_t end = std::min(rows.size(), at + batch_rows);
    std::vector<Row> chunk(rows.begin() + static_cast<std::ptrdiff_t>(at), rows.begin() + static_cast<std::ptrdiff_t>(end));
    batches.push_back(RecordBatch::from_rows(schema, chunk));
  }
  return from_batches(std::move(schema), std::move(batches));
}

StreamingDataFrame StreamingDataFrame::from_function(SchemaPtr schema,
                                                     std::function<std::optional<RecordBatch>()> fn) {
  return StreamingDataFrame(std::move(schema), std::make_unique<FunctionProducer>(std::move(fn)));
}

void StreamingDataFrame::claim(Mode mode) {
  if (mode_ == Mode::Unset) {
    mode_ = mode;
    return;
  }
  if (mode_ != mode) throw Error::bad_request("stream already consumed");
}

std::optional<RecordBatch> StreamingDataFrame::pull() {
  if (error_) std::rethrow_exception(error_);
  if (state_ == State::Exhausted) return std::nullopt;
  state_ = State::Streaming;
  try {
    while (true) {
      std::optional<RecordBatch> batch = producer_->produce();
      if (!batch) {
        state_ = State::Exhausted;
        producer_.reset();
        return std::nullopt;
      }
      if (batch->num_rows() == 0) continue;
      Validation v = validate_batch(*schema_, *batch);
      if (!v.ok()) throw Error::type_error(v.detail);
      ++batches_yielded_;
      return batch;
    }
  } catch (const Error&) {
    error_ = std::current_exception();
  } catch (const std::exception& e) {
    error_ = std::make_exception_ptr(Error::internal(e.what()));
  }
  producer_.reset();
  std::rethrow_exception(error_);
}

std::optional<RecordBatch> StreamingDataFrame::next_batch() {
  claim(Mode::Batches);
  return pull();
}

std::optional<Row> StreamingDataFrame::next_row() {
  claim(Mode::Rows);
  while (!row_batch_ || row_pos_ >= row_batch_->num_rows()) {
    row_batch_ = pull();
    row_pos_ = 0;
    if (!row_batch_) return std::nullopt;
  }
  return row_batch_->row(row_pos_++);
}

StreamingDataFrame::RowRange StreamingDataFrame::rows() {
  if (mode_ != Mode::Unset) throw Error::bad_request("stream already consumed");
  mode_ = Mode::Rows;
  return RowRange(this);
}

void StreamingDataFrame::RowIterator::advance() {
  auto r = sdf_->next_row();
  if (r) {
    current_ = std::move(*r);
  } else {
    sdf_ = nullptr;
  }
}

std::vector<RecordBatch> StreamingDataFrame::collect_batches() {
  std::vector<RecordBatch> out;
  while (auto b = next_batch()) out.push_back(std::move(*b));
  return out;
}

std::vector<Row> StreamingDataFrame::collect_rows() {
  std::vector<Row> out;
  while (auto r = next_row()) out.push_back(std::move(*r));
  return out;
}

}  // namespace dacp
