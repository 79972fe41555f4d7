// SPDX-License-Identifier: Apache-2.0
#include "dacp/client/frame_builder.hpp"

#include <set>

#include "dacp/client/connection.hpp"
#include "dacp/error.hpp"
#include "dacp/uri.hpp"

namespace dacp::client {

FrameBuilder::FrameBuilder(Connection* connection, std::string uri)
    : connection_(connection), counter_(std::make_shared<int>(0)) {
  parse_uri_or_throw(uri);
  dag::DagNode get;
  get.id = next_id("get");
  get.kind = dag::NodeKind::SourceGet;
  get.uri = std::move(uri);
  task_.nodes.push_back(std::move(get));
  task_.sink = task_.nodes.back().id;
}

std::string FrameBuilder::next_id(const char* kind) const { return std::string(kind) + "_" + std::to_string(++*counter_); }

FrameBuilder FrameBuilder::append(dag::DagNode node) const {
  dag::DagTask t = task_;
  const std::string prefix = node.id.substr(0, node.id.rfind('_'));
  while (t.find(node.id)) node.id = next_id(prefix.c_str());
  node.inputs = {t.sink};
  t.sink = node.id;
  t.nodes.push_back(std::move(node));
  return FrameBuilder(connection_, std::move(t), counter_);
}

FrameBuilder FrameBuilder::filter(const std::string& predicate) const {
  dag::DagNode n;
  n.id = next_id("filter");
  n.kind = dag::NodeKind::Filter;
  n.predicate = dag::parse_predicate(predicate);
  return append(std::move(n));
}

FrameBuilder FrameBuilder::select(std::vector<std::string> columns) const {
  if (columns.empty()) throw Error::bad_request("select needs at least one column");
  dag::DagNode n;
  n.id = next_id("select");
  n.kind = dag::NodeKind::Select;
  n.columns = std::move(columns);
  return append(std::move(n));
}

FrameBuilder FrameBuilder::map(const std::string& new_column, const std::string& expr) const {
  if (!is_valid_field_name(new_column)) throw Error::bad_request("invalid column name '" + new_column + "'");
  dag::DagNode n;
  n.id = next_id("map");
  n.kind = dag::NodeKind::Map;
  n.new_column = new_column;
  n.expr = dag::parse_expr(expr);
  return append(std::move(n));
}

FrameBuilder FrameBuilder::limit(std::uint64_t n) const {
  dag::DagNode node;
  node.id = next_id("limit");
  node.kind = dag::NodeKind::Limit;
  node.n = n;
  return append(std::move(node));
}

FrameBuilder FrameBuilder::union_with(const FrameBuilder& other) const {
  dag::DagTask t = task_;
  std::set<std::string> taken;
  for (const auto& n : t.nodes) taken.insert(n.id);
  // Rename the other chain's ids where they collide with ours.
  std::map<std::string, std::string> rename;
  for (const auto& n : other.task_.nodes) {
    std::string id = n.id;
    for (int k = 2; taken.count(id); ++k) id = n.id + "_" + std::to_string(k);
    taken.insert(id);
    rename[n.id] = id;
  }
  for (dag::DagNode n : other.task_.nodes) {
    n.id = rename[n.id];
    for (auto& in : n.inputs) in = rename[in];
    t.nodes.push_back(std::move(n));
  }
  dag::DagNode u;
  u.id = next_id("union");
  while (taken.count(u.id)) u.id = next_id("union");
  u.kind = dag::NodeKind::Union;
  u.inputs = {t.sink, rename[other.task_.sink]};
  t.sink = u.id;
  t.nodes.push_back(std::move(u));
  return FrameBuilder(connection_, std::move(t), counter_);
}

StreamingDataFrame FrameBuilder::collect() const {
  if (!connection_) throw Error::bad_request("frame builder has no connection");
  return connection_->cook(task_);
}

}  // namespace dacp::client
