// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dacp/dag/task.hpp"

namespace dacp::dag {

/// Pushes filters and projections into source.get nodes. Rewrites, repeated
/// until none applies:
///   1. a filter whose input is a source.get is AND-ed into its predicate;
///   2. a select whose input is a source.get becomes its projection, keeping
///      predicate columns too (and then the select) when the select drops them;
///   3. a filter above a select moves below it.
/// The result produces the same rows in the same order.
DagTask plan(DagTask task);

}  // namespace dacp::dag
