// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>

#include "dacp/dag/task.hpp"
#include "dacp/sdf/frame.hpp"

namespace dacp::dag {

/// Where source nodes get their data. `open_source` returns the raw stream
/// behind a source.get uri (the engine applies the node's predicate and
/// projection) or behind a source.stream. It must not pull any batch.
struct ExecContext {
  std::function<StreamingDataFrame(const DagNode&)> open_source;
};

/// Builds the pull chain for `task`. Schemas are checked before any data
/// flows; errors name the node. Nothing is read from a source until the
/// returned frame is pulled.
StreamingDataFrame execute(const DagTask& task, const ExecContext& context);

}  // namespace dacp::dag
