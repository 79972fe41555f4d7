// SPDX-License-Identifier: Apache-2.0
#include "dacp/federation/federation.hpp"

#include <future>
#include <set>

#include "dacp/dag/engine.hpp"
#include "dacp/dag/planner.hpp"
#include "dacp/error.hpp"
#include "dacp/util/log.hpp"

namespace dacp::federation {

namespace {

bool is_unary_op(dag::NodeKind k) {
  return k == dag::NodeKind::Filter || k == dag::NodeKind::Select || k == dag::NodeKind::Map ||
         k == dag::NodeKind::Limit;
}

Endpoint owner_of(const dag::DagNode& n) {
  const auto uri = parse_uri(n.uri);
  if (!uri) throw Error::bad_request("dag node '" + n.id + "': cannot parse uri '" + n.uri + "'");
  return Endpoint{uri->host, uri->port};
}

}  // namespace

FederationPlan partition(const dag::DagTask& task, const std::optional<Endpoint>& self) {
  FederationPlan plan;
  std::set<std::string> moved;
  std::map<std::string, std::size_t> fragment_of_root;

  for (const auto& id : dag::dfs_from_sink(task)) {
    const dag::DagNode& src = task.at(id);
    if (src.kind != dag::NodeKind::SourceGet) continue;
    Endpoint owner = owner_of(src);
    if (self && owner == *self) continue;

    std::vector<std::string> chain{src.id};
    while (auto consumer = task.consumer_of(chain.back())) {
      if (!is_unary_op(task.at(*consumer).kind)) break;
      chain.push_back(*consumer);
    }
    Fragment f;
    f.owner = std::move(owner);
    f.placeholder = chain.back();
    for (const auto& n : task.nodes) {
      if (std::find(chain.begin(), chain.end(), n.id) != chain.end()) f.task.nodes.push_back(n);
    }
    f.task.sink = chain.back();
    moved.insert(chain.begin(), chain.end());
    fragment_of_root[f.placeholder] = plan.fragments.size();
    plan.placeholder_map[f.placeholder] = plan.fragments.size();
    plan.fragments.push_back(std::move(f));
  }

  plan.residual.sink = task.sink;
  for (const auto& n : task.nodes) {
    if (auto it = fragment_of_root.find(n.id); it != fragment_of_root.end()) {
      dag::DagNode placeholder;
      placeholder.id = n.id;
      placeholder.kind = dag::NodeKind::SourceStream;
      placeholder.endpoint = plan.fragments[it->second].owner.to_string();
      plan.residual.nodes.push_back(std::move(placeholder));
    } else if (!moved.count(n.id)) {
      plan.residual.nodes.push_back(n);
    }
  }
  return plan;
}

dag::DagTask recompose(const FederationPlan& plan) {
  dag::DagTask out;
  out.sink = plan.residual.sink;
  for (const auto& n : plan.residual.nodes) {
    auto it = plan.placeholder_map.find(n.id);
    if (it == plan.placeholder_map.end() || n.kind != dag::NodeKind::SourceStream) {
      out.nodes.push_back(n);
      continue;
    }
    for (const auto& f : plan.fragments[it->second].task.nodes) out.nodes.push_back(f);
  }
  return out;
}

StreamingDataFrame orchestrate(const FederationPlan& plan, const CredentialsFn& credentials,
                               const OrchestrateOptions& options) {
  struct Published {
    std::shared_ptr<client::Connection> conn;
    client::Publication pub;
  };
  std::vector<std::future<Published>> pending;
  pending.reserve(plan.fragments.size());
  for (const auto& f : plan.fragments) {
    pending.push_back(std::async(std::launch::async, [&f, &credentials, &options] {
      auto conn = std::make_shared<client::Connection>(
          client::Connection::connect(f.owner, credentials(f.owner), options.client));
      client::Publication pub = conn->publish(f.task, options.ttl_seconds);
      return Published{std::move(conn), std::move(pub)};
    }));
  }
  std::vector<Published> published;
  std::exception_ptr failure;
  for (std::size_t i = 0; i < pending.size(); ++i) {
    const std::string where =
        "fragment '" + plan.fragments[i].placeholder + "' at " + plan.fragments[i].owner.to_string() + ": ";
    try {
      published.push_back(pending[i].get());
    } catch (const TransportError& e) {
      if (!failure) failure = std::make_exception_ptr(TransportError(where + e.what()));
    } catch (const Error& e) {
      if (!failure) failure = std::make_exception_ptr(Error(e.code(), where + e.what()));
    } catch (const std::exception& e) {
      if (!failure) failure = std::make_exception_ptr(Error::internal(where + e.what()));
    }
  }
  if (failure) std::rethrow_exception(failure);

  dag::DagTask residual = plan.residual;
  for (auto& n : residual.nodes) {
    auto it = plan.placeholder_map.find(n.id);
    if (it == plan.placeholder_map.end() || n.kind != dag::NodeKind::SourceStream) continue;
    const auto& pub = published[it->second].pub;
    n.endpoint = pub.endpoint.to_string();
    n.stream_id = pub.stream_id;
    n.stream_token = pub.stream_token;
    n.stream_schema = pub.schema;
  }
  log::debug("federation.published", {{"fragments", published.size()}});

  dag::ExecContext ctx;
  ctx.open_source = [&](const dag::DagNode& n) -> StreamingDataFrame {
    if (n.kind == dag::NodeKind::SourceStream) {
      auto it = plan.placeholder_map.find(n.id);
      if (it != plan.placeholder_map.end()) {
        return published[it->second].conn->pull(n.stream_id, n.stream_token, n.stream_schema);
      }
      const auto ep = parse_endpoint(n.endpoint);
      if (!ep) throw Error::bad_request("bad endpoint '" + n.endpoint + "'");
      return client::pull_stream(*ep, n.stream_id, n.stream_token, n.stream_schema, options.client);
    }
    if (!options.local_source) {
      throw Error::bad_request("no local data source for '" + n.uri + "' at the coordinator");
    }
    return options.local_source(n);
  };
  return dag::execute(residual, ctx);
}

StreamingDataFrame run_federated(const dag::DagTask& task, const std::optional<Endpoint>& self,
                                 const CredentialsFn& credentials, const OrchestrateOptions& options) {
  return orchestrate(partition(dag::plan(task), self), credentials, options);
}

}  // namespace dacp::federation
