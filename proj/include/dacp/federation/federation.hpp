// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dacp/client/connection.hpp"
#include "dacp/dag/task.hpp"
#include "dacp/sdf/frame.hpp"
#include "dacp/uri.hpp"

namespace dacp::federation {

/// A sub-task shipped to the server that owns its data.
struct Fragment {
  Endpoint owner;
  dag::DagTask task;
  /// Id of the source.stream node standing in for this fragment in the
  /// residual; equal to the id of the fragment's sink.
  std::string placeholder;
};

struct FederationPlan {
  std::vector<Fragment> fragments;
  /// What runs at the coordinator, with placeholders for the fragments.
  dag::DagTask residual;
  std::map<std::string, std::size_t> placeholder_map;
};

/// Splits `task` by data locality. Every source.get not served by `self`
/// (all of them when `self` is empty) becomes a fragment together with the
/// longest chain of unary operators above it. Fragments are ordered by
/// first use in a depth-first walk from the sink. Throws Error(BadRequest)
/// for unparsable source uris.
FederationPlan partition(const dag::DagTask& task, const std::optional<Endpoint>& self);

/// Puts the fragments back in place of their placeholders.
dag::DagTask recompose(const FederationPlan& plan);

using CredentialsFn = std::function<client::Credentials(const Endpoint&)>;

struct OrchestrateOptions {
  client::ClientOptions client;
  std::uint32_t ttl_seconds = 600;
  /// Opens source.get nodes left in the residual (sources local to the
  /// coordinator). Without it, such nodes are an error.
  std::function<StreamingDataFrame(const dag::DagNode&)> local_source;
};

/// Publishes every fragment (concurrently) and returns the residual's
/// output. A failed publish aborts before any PULL. Each fragment's PULL
/// goes out on the first pull of its placeholder.
StreamingDataFrame orchestrate(const FederationPlan& plan, const CredentialsFn& credentials,
                               const OrchestrateOptions& options = {});

/// plan + partition + orchestrate.
StreamingDataFrame run_federated(const dag::DagTask& task, const std::optional<Endpoint>& self,
                                 const CredentialsFn& credentials, const OrchestrateOptions& options = {});

}  // namespace dacp::federation
