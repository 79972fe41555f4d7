// SPDX-License-Identifier: Apache-2.0
#include "dacp/dag/engine.hpp"

#include "dacp/error.hpp"

namespace dacp::dag {
namespace {

/// Predicate (optional) then projection (optional) over one input.
class FilterProject final : public BatchProducer {
 public:
  FilterProject(StreamingDataFrame input, std::optional<BoundPredicate> predicate,
                std::optional<std::vector<std::size_t>> projection, SchemaPtr out)
      : input_(std::move(input)), predicate_(std::move(predicate)), projection_(std::move(projection)),
        out_(std::move(out)) {}

  std::optional<RecordBatch> produce() override {
    while (auto batch = input_.next_batch()) {
      RecordBatch b = std::move(*batch);
      if (predicate_) {
        auto keep = predicate_->select(b);
        if (keep.empty()) continue;
        if (keep.size() != b.num_rows()) b = b.take(keep);
      }
      if (projection_) return b.project(out_, *projection_);
      return RecordBatch(out_, b.columns(), b.num_rows());
    }
    return std::nullopt;
  }

 private:
  StreamingDataFrame input_;
  std::optional<BoundPredicate> predicate_;
  std::optional<std::vector<std::size_t>> projection_;
  SchemaPtr out_;
};

class MapOp final : public BatchProducer {
 public:
  MapOp(StreamingDataFrame input, BoundExpr expr, SchemaPtr out)
      : input_(std::move(input)), expr_(std::move(expr)), out_(std::move(out)) {}

  std::optional<RecordBatch> produce() override {
    auto batch = input_.next_batch();
    if (!batch) return std::nullopt;
    std::vector<ColumnPtr> cols = batch->columns();
    cols.push_back(std::make_shared<const Column>(expr_.evaluate(*batch)));
    return RecordBatch(out_, std::move(cols), batch->num_rows());
  }

 private:
  StreamingDataFrame input_;
  BoundExpr expr_;
  SchemaPtr out_;
};

class LimitOp final : public BatchProducer {
 public:
  LimitOp(StreamingDataFrame input, std::uint64_t n) : input_(std::move(input)), remaining_(n) {
    if (remaining_ == 0) input_.reset();
  }

  std::optional<RecordBatch> produce() override {
    if (!input_) return std::nullopt;
    auto batch = input_->next_batch();
    if (!batch) {
      input_.reset();
      return std::nullopt;
    }
    if (batch->num_rows() >= remaining_) {
      RecordBatch head = batch->num_rows() == remaining_ ? std::move(*batch) : batch->slice(0, remaining_);
      remaining_ = 0;
      // Releases the upstream chain: no further source reads.
      input_.reset();
      return head;
    }
    remaining_ -= batch->num_rows();
    return batch;
  }

 private:
  std::optional<StreamingDataFrame> input_;
  std::uint64_t remaining_;
};

class UnionOp final : public BatchProducer {
 public:
  UnionOp(StreamingDataFrame a, StreamingDataFrame b, SchemaPtr out) : out_(std::move(out)) {
    inputs_.push_back(std::move(a));
    inputs_.push_back(std::move(b));
  }

  std::optional<RecordBatch> produce() override {
    while (current_ < inputs_.size()) {
      if (auto batch = inputs_[current_].next_batch()) {
        return RecordBatch(out_, batch->columns(), batch->num_rows());
      }
      ++current_;
    }
    return std::nullopt;
  }

 private:
  std::vector<StreamingDataFrame> inputs_;
  std::size_t current_ = 0;
  SchemaPtr out_;
};

std::vector<std::size_t> indices_of(const Schema& in, const std::vector<std::string>& names) {
  std::vector<std::size_t> out;
  for (const auto& n : names) out.push_back(*in.index_of(n));
  return out;
}

template <typename F>
StreamingDataFrame with_context(const DagNode& n, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    const std::string what = e.what();
    if (what.rfind("dag node", 0) == 0) throw;
    throw Error(e.code(), "dag node '" + n.id + "': " + what);
  }
}

class Builder {
 public:
  Builder(const DagTask& task, const ExecContext& ctx) : task_(task), ctx_(ctx) {}

  StreamingDataFrame build(const std::string& id) {
    const DagNode& n = task_.at(id);
    std::vector<StreamingDataFrame> inputs;
    if (is_source(n.kind)) {
      if (!ctx_.open_source) throw Error::internal("no source opener configured");
      inputs.push_back(with_context(n, [&] { return ctx_.open_source(n); }));
    } else {
      for (const auto& in : n.inputs) inputs.push_back(build(in));
    }
    return with_context(n, [&] { return wrap(n, std::move(inputs)); });
  }

 private:
  StreamingDataFrame wrap(const DagNode& n, std::vector<StreamingDataFrame> inputs) {
    std::vector<SchemaPtr> schemas;
    for (const auto& f : inputs) schemas.push_back(f.schema_ptr());
    if (n.kind == NodeKind::SourceStream && n.stream_schema && !(*n.stream_schema == *schemas[0])) {
      throw Error::type_error("stream schema differs from the published one");
    }
    SchemaPtr out = node_output_schema(n, schemas);
    const Schema& in = *schemas[0];
    std::unique_ptr<BatchProducer> op;
    switch (n.kind) {
      case NodeKind::SourceStream: return std::move(inputs[0]);
      case NodeKind::SourceGet: {
        std::optional<BoundPredicate> pred;
        if (n.predicate) pred.emplace(n.predicate, in);
        std::optional<std::vector<std::size_t>> proj;
        if (n.projection) proj = indices_of(in, *n.projection);
        if (!pred && !proj) return std::move(inputs[0]);
        op = std::make_unique<FilterProject>(std::move(inputs[0]), std::move(pred), std::move(proj), out);
        break;
      }
      case NodeKind::Filter:
        op = std::make_unique<FilterProject>(std::move(inputs[0]), BoundPredicate(n.predicate, in), std::nullopt,
                                             out);
        break;
      case NodeKind::Select:
        op = std::make_unique<FilterProject>(std::move(inputs[0]), std::nullopt, indices_of(in, n.columns), out);
        break;
      case NodeKind::Map: op = std::make_unique<MapOp>(std::move(inputs[0]), BoundExpr(n.expr, in), out); break;
      case NodeKind::Limit: op = std::make_unique<LimitOp>(std::move(inputs[0]), n.n); break;
      case NodeKind::Union: op = std::make_unique<UnionOp>(std::move(inputs[0]), std::move(inputs[1]), out); break;
    }
    return StreamingDataFrame(out, std::move(op));
  }

  const DagTask& task_;
  const ExecContext& ctx_;
};

}  // namespace

StreamingDataFrame execute(const DagTask& task, const ExecContext& context) {
  validate_structure(task);
  return Builder(task, context).build(task.sink);
}

}  // namespace dacp::dag
