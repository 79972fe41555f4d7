// SPDX-License-Identifier: Apache-2.0
#include "dacp/dag/task.hpp"

#include <json.hpp>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "dacp/datasource/csv.hpp"
#include "dacp/error.hpp"
#include "dacp/uri.hpp"

namespace dacp::dag {

using nlohmann::json;

namespace {

struct KindInfo {
  NodeKind kind;
  std::string_view name;
  std::size_t arity;
};

constexpr KindInfo kKinds[] = {
    {NodeKind::SourceGet, "source.get", 0},  {NodeKind::SourceStream, "source.stream", 0},
    {NodeKind::Filter, "op.filter", 1},      {NodeKind::Select, "op.select", 1},
    {NodeKind::Map, "op.map", 1},            {NodeKind::Limit, "op.limit", 1},
    {NodeKind::Union, "op.union", 2},
};

const KindInfo& info(NodeKind k) {
  for (const auto& i : kKinds) {
    if (i.kind == k) return i;
  }
  throw Error::internal("unknown node kind");
}

[[noreturn]] void bad(const std::string& node, const std::string& msg) {
  if (node.empty()) throw Error::bad_request("dag: " + msg);
  throw Error::bad_request("dag node '" + node + "': " + msg);
}

std::set<std::string_view> allowed_fields(NodeKind k) {
  std::set<std::string_view> s{"id", "kind", "inputs"};
  switch (k) {
    case NodeKind::SourceGet: s.insert({"uri", "projection", "predicate"}); break;
    case NodeKind::SourceStream: s.insert({"endpoint", "stream_id", "stream_token", "schema"}); break;
    case NodeKind::Filter: s.insert("predicate"); break;
    case NodeKind::Select: s.insert("columns"); break;
    case NodeKind::Map: s.insert({"new_column", "expr"}); break;
    case NodeKind::Limit: s.insert("n"); break;
    case NodeKind::Union: break;
  }
  return s;
}

std::string get_string(const json& obj, const char* key, const std::string& node, bool required = true) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    if (required) bad(node, std::string("missing \"") + key + "\"");
    return {};
  }
  if (!it->is_string()) bad(node, std::string("\"") + key + "\" must be a string");
  return it->get<std::string>();
}

std::vector<std::string> get_names(const json& v, const char* key, const std::string& node) {
  if (!v.is_array()) bad(node, std::string("\"") + key + "\" must be an array of strings");
  std::vector<std::string> out;
  for (const auto& item : v) {
    if (!item.is_string()) bad(node, std::string("\"") + key + "\" must be an array of strings");
    out.push_back(item.get<std::string>());
  }
  return out;
}

PredicatePtr predicate_or_bad(const std::string& text, const std::string& node) {
  try {
    return parse_predicate(text);
  } catch (const Error& e) {
    bad(node, e.what());
  }
}

DagNode decode_node(const json& obj) {
  if (!obj.is_object()) bad("", "each node must be an object");
  DagNode n;
  n.id = get_string(obj, "id", "");
  if (n.id.empty()) bad("", "node id must be non-empty");
  const std::string kind = get_string(obj, "kind", n.id);
  auto k = node_kind_from_string(kind);
  if (!k) bad(n.id, "unknown kind '" + kind + "'");
  n.kind = *k;
  const auto allowed = allowed_fields(n.kind);
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) bad(n.id, "unexpected field \"" + it.key() + "\" for " + kind);
  }
  if (auto it = obj.find("inputs"); it != obj.end()) n.inputs = get_names(*it, "inputs", n.id);

  switch (n.kind) {
    case NodeKind::SourceGet: {
      n.uri = get_string(obj, "uri", n.id);
      if (!parse_uri(n.uri)) bad(n.id, "invalid uri '" + n.uri + "'");
      if (auto it = obj.find("projection"); it != obj.end() && !it->is_null()) {
        n.projection = get_names(*it, "projection", n.id);
      }
      if (auto it = obj.find("predicate"); it != obj.end() && !it->is_null()) {
        if (!it->is_string()) bad(n.id, "\"predicate\" must be a string");
        n.predicate = predicate_or_bad(it->get<std::string>(), n.id);
      }
      break;
    }
    case NodeKind::SourceStream: {
      n.endpoint = get_string(obj, "endpoint", n.id);
      if (!parse_endpoint(n.endpoint)) bad(n.id, "invalid endpoint '" + n.endpoint + "'");
      n.stream_id = get_string(obj, "stream_id", n.id);
      n.stream_token = get_string(obj, "stream_token", n.id);
      if (auto it = obj.find("schema"); it != obj.end() && !it->is_null()) {
        try {
          n.stream_schema = std::make_shared<const Schema>(datasource::schema_from_json(*it));
        } catch (const Error& e) {
          bad(n.id, e.what());
        }
      }
      break;
    }
    case NodeKind::Filter:
      n.predicate = predicate_or_bad(get_string(obj, "predicate", n.id), n.id);
      break;
    case NodeKind::Select: {
      auto it = obj.find("columns");
      if (it == obj.end()) bad(n.id, "missing \"columns\"");
      n.columns = get_names(*it, "columns", n.id);
      if (n.columns.empty()) bad(n.id, "\"columns\" must not be empty");
      break;
    }
    case NodeKind::Map: {
      n.new_column = get_string(obj, "new_column", n.id);
      const std::string text = get_string(obj, "expr", n.id);
      try {
        n.expr = parse_expr(text);
      } catch (const Error& e) {
        bad(n.id, e.what());
      }
      break;
    }
    case NodeKind::Limit: {
      auto it = obj.find("n");
      if (it == obj.end()) bad(n.id, "missing \"n\"");
      if (!it->is_number_unsigned() && !(it->is_number_integer() && it->get<std::int64_t>() >= 0)) {
        bad(n.id, "\"n\" must be a non-negative integer");
      }
      n.n = it->get<std::uint64_t>();
      break;
    }
    case NodeKind::Union: break;
  }
  return n;
}

json encode_node(const DagNode& n) {
  json o = json::object();
  o["id"] = n.id;
  o["kind"] = std::string(to_string(n.kind));
  switch (n.kind) {
    case NodeKind::SourceGet:
      o["uri"] = n.uri;
      if (n.projection) o["projection"] = *n.projection;
      if (n.predicate) o["predicate"] = to_string(*n.predicate);
      break;
    case NodeKind::SourceStream:
      o["endpoint"] = n.endpoint;
      o["stream_id"] = n.stream_id;
      o["stream_token"] = n.stream_token;
      if (n.stream_schema) o["schema"] = datasource::schema_to_json(*n.stream_schema);
      break;
    case NodeKind::Filter: o["predicate"] = to_string(*n.predicate); break;
    case NodeKind::Select: o["columns"] = n.columns; break;
    case NodeKind::Map:
      o["new_column"] = n.new_column;
      o["expr"] = to_string(*n.expr);
      break;
    case NodeKind::Limit: o["n"] = n.n; break;
    case NodeKind::Union: break;
  }
  o["inputs"] = n.inputs;
  return o;
}

}  // namespace

std::string_view to_string(NodeKind kind) { return info(kind).name; }

std::optional<NodeKind> node_kind_from_string(std::string_view s) {
  for (const auto& i : kKinds) {
    if (i.name == s) return i.kind;
  }
  return std::nullopt;
}

std::size_t arity(NodeKind kind) { return info(kind).arity; }

bool is_source(NodeKind kind) { return kind == NodeKind::SourceGet || kind == NodeKind::SourceStream; }

const DagNode* DagTask::find(std::string_view id) const {
  for (const auto& n : nodes) {
    if (n.id == id) return &n;
  }
  return nullptr;
}

DagNode* DagTask::find(std::string_view id) {
  for (auto& n : nodes) {
    if (n.id == id) return &n;
  }
  return nullptr;
}

const DagNode& DagTask::at(std::string_view id) const {
  const DagNode* n = find(id);
  if (!n) throw Error::bad_request("dag: no node '" + std::string(id) + "'");
  return *n;
}

std::optional<std::string> DagTask::consumer_of(std::string_view id) const {
  for (const auto& n : nodes) {
    for (const auto& in : n.inputs) {
      if (in == id) return n.id;
    }
  }
  return std::nullopt;
}

void validate_structure(const DagTask& task) {
  if (task.nodes.empty()) bad("", "task has no nodes");
  std::unordered_map<std::string_view, const DagNode*> by_id;
  for (const auto& n : task.nodes) {
    if (n.id.empty()) bad("", "node id must be non-empty");
    if (!by_id.emplace(n.id, &n).second) bad(n.id, "duplicate node id");
  }
  std::unordered_map<std::string_view, std::size_t> consumers;
  for (const auto& n : task.nodes) {
    if (n.inputs.size() != arity(n.kind)) {
      bad(n.id, std::string(to_string(n.kind)) + " takes " + std::to_string(arity(n.kind)) + " input(s), got " +
                    std::to_string(n.inputs.size()));
    }
    for (const auto& in : n.inputs) {
      if (!by_id.count(in)) bad(n.id, "input '" + in + "' does not exist");
      if (++consumers[in] > 1) bad(in, "output feeds more than one consumer");
    }
  }
  if (task.sink.empty()) bad("", "missing sink");
  if (!by_id.count(task.sink)) bad("", "sink '" + task.sink + "' does not exist");

  // Cycle check, iterative three-colour DFS over input edges.
  enum Colour : std::uint8_t { White, Grey, Black };
  std::unordered_map<std::string_view, Colour> colour;
  for (const auto& n : task.nodes) {
    if (colour[n.id] != White) continue;
    std::vector<std::pair<const DagNode*, std::size_t>> stack{{&n, 0}};
    colour[n.id] = Grey;
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      if (next == node->inputs.size()) {
        colour[node->id] = Black;
        stack.pop_back();
        continue;
      }
      const DagNode* child = by_id[node->inputs[next++]];
      Colour& c = colour[child->id];
      if (c == Grey) bad(child->id, "cycle detected");
      if (c == White) {
        c = Grey;
        stack.push_back({child, 0});
      }
    }
  }

  for (const auto& n : task.nodes) {
    if (n.id != task.sink && consumers[n.id] == 0) bad(n.id, "does not reach the sink");
  }
  if (consumers[task.sink] != 0) bad(task.sink, "sink must not feed another node");
}

DagTask parse_dag(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw Error::bad_request(std::string("dag: invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) bad("", "document must be an object");
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (it.key() != "nodes" && it.key() != "sink") bad("", "unexpected field \"" + it.key() + "\"");
  }
  auto nodes = doc.find("nodes");
  if (nodes == doc.end() || !nodes->is_array()) bad("", "\"nodes\" must be an array");
  DagTask task;
  for (const auto& item : *nodes) task.nodes.push_back(decode_node(item));
  auto sink = doc.find("sink");
  if (sink == doc.end()) bad("", "missing sink");
  if (!sink->is_string()) bad("", "\"sink\" must be a string");
  task.sink = sink->get<std::string>();
  validate_structure(task);
  return task;
}

std::string to_json(const DagTask& task) {
  json nodes = json::array();
  for (const auto& n : task.nodes) nodes.push_back(encode_node(n));
  json doc = json::object();
  doc["nodes"] = std::move(nodes);
  doc["sink"] = task.sink;
  return doc.dump();
}

bool operator==(const DagTask& a, const DagTask& b) { return to_json(a) == to_json(b); }

SchemaPtr node_output_schema(const DagNode& node, const std::vector<SchemaPtr>& inputs) {
  const Schema& in = *inputs.at(0);
  switch (node.kind) {
    case NodeKind::SourceStream: return inputs[0];
    case NodeKind::SourceGet: {
      if (node.predicate) check_predicate(*node.predicate, in);
      if (!node.projection) return inputs[0];
      std::vector<Field> fields;
      for (const auto& name : *node.projection) {
        auto idx = in.index_of(name);
        if (!idx) throw Error::type_error("projection references unknown column '" + name + "'");
        fields.push_back(in.field(*idx));
      }
      return make_schema(std::move(fields));
    }
    case NodeKind::Filter:
      check_predicate(*node.predicate, in);
      return inputs[0];
    case NodeKind::Limit: return inputs[0];
    case NodeKind::Select: {
      std::vector<Field> fields;
      for (const auto& name : node.columns) {
        auto idx = in.index_of(name);
        if (!idx) throw Error::type_error("select references unknown column '" + name + "'");
        fields.push_back(in.field(*idx));
      }
      return make_schema(std::move(fields));
    }
    case NodeKind::Map: {
      const DataType t = result_type(*node.expr, in);
      if (in.index_of(node.new_column)) {
        throw Error::type_error("map column '" + node.new_column + "' already exists");
      }
      std::vector<Field> fields = in.fields();
      fields.push_back({node.new_column, t, true});
      return make_schema(std::move(fields));
    }
    case NodeKind::Union: {
      const Schema& other = *inputs.at(1);
      bool same = in.size() == other.size();
      for (std::size_t i = 0; same && i < in.size(); ++i) {
        same = in.field(i).name == other.field(i).name && in.field(i).type == other.field(i).type;
      }
      if (!same) throw Error::type_error("union inputs differ: " + in.to_string() + " vs " + other.to_string());
      if (in == other) return inputs[0];
      std::vector<Field> fields = in.fields();
      for (std::size_t i = 0; i < fields.size(); ++i) fields[i].nullable = fields[i].nullable || other.field(i).nullable;
      return make_schema(std::move(fields));
    }
  }
  throw Error::internal("unknown node kind");
}

std::map<std::string, SchemaPtr> infer_schemas(const DagTask& task, const SourceSchemaFn& source_schema) {
  std::map<std::string, SchemaPtr> out;
  auto order = dfs_from_sink(task);
  // Inputs before consumers.
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const DagNode& n = task.at(*it);
    std::vector<SchemaPtr> inputs;
    try {
      if (is_source(n.kind)) {
        inputs.push_back(source_schema(n));
      } else {
        for (const auto& in : n.inputs) inputs.push_back(out.at(in));
      }
      out[n.id] = node_output_schema(n, inputs);
    } catch (const Error& e) {
      throw Error(e.code(), "dag node '" + n.id + "': " + e.what());
    }
  }
  return out;
}

SchemaPtr infer_schema(const DagTask& task, const SourceSchemaFn& source_schema) {
  return infer_schemas(task, source_schema).at(task.sink);
}

std::vector<std::string> dfs_from_sink(const DagTask& task) {
  std::vector<std::string> out;
  std::vector<std::string> stack{task.sink};
  while (!stack.empty()) {
    std::string id = std::move(stack.back());
    stack.pop_back();
    const DagNode& n = task.at(id);
    out.push_back(id);
    for (auto it = n.inputs.rbegin(); it != n.inputs.rend(); ++it) stack.push_back(*it);
  }
  return out;
}

}  // namespace dacp::dag
