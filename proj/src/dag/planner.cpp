// SPDX-License-Identifier: Apache-2.0
#include "dacp/dag/planner.hpp"

#include <algorithm>

namespace dacp::dag {
namespace {

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

/// Drops `node`, wiring its consumer (or the sink) to `replacement`.
void splice_out(DagTask& task, const std::string& node, const std::string& replacement) {
  for (auto& n : task.nodes) {
    for (auto& in : n.inputs) {
      if (in == node) in = replacement;
    }
  }
  if (task.sink == node) task.sink = replacement;
  std::erase_if(task.nodes, [&](const DagNode& n) { return n.id == node; });
}

bool merge_filter(DagTask& task, DagNode& filter) {
  DagNode& src = *task.find(filter.inputs[0]);
  if (src.kind != NodeKind::SourceGet) return false;
  src.predicate = src.predicate ? Predicate::conj(src.predicate, filter.predicate) : filter.predicate;
  splice_out(task, filter.id, src.id);
  return true;
}

bool merge_select(DagTask& task, DagNode& select) {
  DagNode& src = *task.find(select.inputs[0]);
  if (src.kind != NodeKind::SourceGet) return false;
  std::vector<std::string> projection;
  if (src.predicate) {
    for (const auto& c : referenced_columns(*src.predicate)) {
      if (!contains(select.columns, c)) projection.push_back(c);
    }
  }
  const bool residual = !projection.empty();
  projection.insert(projection.end(), select.columns.begin(), select.columns.end());
  if (residual) {
    if (src.projection == projection) return false;
    src.projection = std::move(projection);
    return true;
  }
  src.projection = std::move(projection);
  splice_out(task, select.id, src.id);
  return true;
}

bool sink_filter_below_select(DagTask& task, DagNode& filter) {
  DagNode& select = *task.find(filter.inputs[0]);
  if (select.kind != NodeKind::Select) return false;
  for (const auto& c : referenced_columns(*filter.predicate)) {
    if (!contains(select.columns, c)) return false;
  }
  const std::string filter_id = filter.id;
  const std::string select_id = select.id;
  const std::string below = select.inputs[0];
  for (auto& n : task.nodes) {
    for (auto& in : n.inputs) {
      if (in == filter_id) in = select_id;
    }
  }
  if (task.sink == filter_id) task.sink = select_id;
  task.find(filter_id)->inputs = {below};
  task.find(select_id)->inputs = {filter_id};
  return true;
}

bool rewrite_once(DagTask& task) {
  for (const auto& id : dfs_from_sink(task)) {
    DagNode& n = *task.find(id);
    if (n.kind == NodeKind::Filter && (merge_filter(task, n) || sink_filter_below_select(task, n))) return true;
    if (n.kind == NodeKind::Select && merge_select(task, n)) return true;
  }
  return false;
}

}  // namespace

DagTask plan(DagTask task) {
  while (rewrite_once(task)) {
  }
  return task;
}

}  // namespace dacp::dag
