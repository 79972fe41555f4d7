// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <string>
#include <vector>

#include "dacp/dag/task.hpp"
#include "dacp/sdf/frame.hpp"

namespace dacp::client {

class Connection;

/// Chainable DAG construction. Each call returns a new builder ending in the
/// added node; predicates and expressions are parsed immediately, so syntax
/// errors surface at the call. collect() submits the task with COOK.
class FrameBuilder {
 public:
  FrameBuilder(Connection* connection, std::string uri);

  FrameBuilder filter(const std::string& predicate) const;
  FrameBuilder select(std::vector<std::string> columns) const;
  FrameBuilder map(const std::string& new_column, const std::string& expr) const;
  FrameBuilder limit(std::uint64_t n) const;
  /// This chain's rows, then `other`'s.
  FrameBuilder union_with(const FrameBuilder& other) const;

  const dag::DagTask& task() const { return task_; }
  StreamingDataFrame collect() const;

 private:
  FrameBuilder(Connection* connection, dag::DagTask task, std::shared_ptr<int> counter)
      : connection_(connection), task_(std::move(task)), counter_(std::move(counter)) {}
  FrameBuilder append(dag::DagNode node) const;
  std::string next_id(const char* kind) const;

  Connection* connection_;
  dag::DagTask task_;
  std::shared_ptr<int> counter_;
};

}  // namespace dacp::client
