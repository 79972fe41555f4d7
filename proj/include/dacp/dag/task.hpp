// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dacp/dag/expr.hpp"
#include "dacp/dag/predicate.hpp"
#include "dacp/sdf/types.hpp"

namespace dacp::dag {

enum class NodeKind : std::uint8_t { SourceGet, SourceStream, Filter, Select, Map, Limit, Union };

std::string_view to_string(NodeKind kind);
std::optional<NodeKind> node_kind_from_string(std::string_view s);
std::size_t arity(NodeKind kind);
bool is_source(NodeKind kind);

struct DagNode {
  std::string id;
  NodeKind kind = NodeKind::SourceGet;
  std::vector<std::string> inputs;

  // source.get
  std::string uri;
  std::optional<std::vector<std::string>> projection;
  // source.get (optional) and op.filter (required)
  PredicatePtr predicate;

  // source.stream
  std::string endpoint;
  std::string stream_id;
  std::string stream_token;
  SchemaPtr stream_schema;  // from PUBLISH_OK; lets the stream stay unopened until pulled

  // op.select
  std::vector<std::string> columns;

  // op.map
  std::string new_column;
  ExprPtr expr;

  // op.limit
  std::uint64_t n = 0;
};

/// A DAG whose nodes each feed at most one consumer, ending in `sink`.
/// Node order is the document order.
struct DagTask {
  std::vector<DagNode> nodes;
  std::string sink;

  const DagNode* find(std::string_view id) const;
  DagNode* find(std::string_view id);
  const DagNode& at(std::string_view id) const;
  /// Id of the node consuming `id`, or nullopt for the sink.
  std::optional<std::string> consumer_of(std::string_view id) const;
};

/// Parses and validates a DAG document:
///   {"nodes": [{"id": .., "kind": .., <params>, "inputs": [..]}], "sink": ..}
/// Throws Error(BadRequest) for syntax errors, unknown kinds or fields,
/// duplicate ids, bad arity, dangling inputs, cycles, nodes with more than
/// one consumer, or a missing sink.
DagTask parse_dag(std::string_view document);

/// Structural checks only (what parse_dag enforces after decoding).
void validate_structure(const DagTask& task);

/// Canonical JSON text; parse_dag(to_json(t)) reproduces t.
std::string to_json(const DagTask& task);

bool operator==(const DagTask& a, const DagTask& b);

/// Output schema of a node given its input schemas (source nodes take the
/// raw source schema as their single input). Throws Error(TypeError).
SchemaPtr node_output_schema(const DagNode& node, const std::vector<SchemaPtr>& inputs);

/// Supplies the raw schema of a source node.
using SourceSchemaFn = std::function<SchemaPtr(const DagNode&)>;

/// Schema of every node, keyed by id. Errors name the offending node.
std::map<std::string, SchemaPtr> infer_schemas(const DagTask& task, const SourceSchemaFn& source_schema);
SchemaPtr infer_schema(const DagTask& task, const SourceSchemaFn& source_schema);

/// Node ids from the sink down, depth first, inputs in order.
std::vector<std::string> dfs_from_sink(const DagTask& task);

}  // namespace dacp::dag
