// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dacp/sdf/record_batch.hpp"

namespace dacp::dag {

enum class CmpOp : std::uint8_t { Eq, Ne, Lt, Le, Gt, Ge };

std::string_view to_string(CmpOp op);

/// Literal operand of a comparison. Integers stay exact; decimals are doubles.
using Literal = std::variant<bool, std::int64_t, double, std::string>;

struct Predicate;
using PredicatePtr = std::shared_ptr<const Predicate>;

struct Predicate {
  enum class Kind : std::uint8_t { Compare, And, Or, Not };

  Kind kind = Kind::Compare;
  std::string column;
  CmpOp op = CmpOp::Eq;
  Literal literal;
  PredicatePtr lhs;  // And/Or left, Not operand
  PredicatePtr rhs;  // And/Or right

  static PredicatePtr compare(std::string column, CmpOp op, Literal literal);
  static PredicatePtr conj(PredicatePtr a, PredicatePtr b);
  static PredicatePtr disj(PredicatePtr a, PredicatePtr b);
  static PredicatePtr negate(PredicatePtr a);
};

/// Structural equality. Decimal literals compare bitwise.
bool equal(const Predicate& a, const Predicate& b);

/// Grammar, loosest binding first:
///   or   := and ("OR" and)*
///   and  := not ("AND" not)*
///   not  := "NOT" not | "(" or ")" | cmp
///   cmp  := ident op literal
/// Throws Error(BadRequest) with the byte offset of the first failure.
PredicatePtr parse_predicate(std::string_view text);

/// Canonical text with the fewest parentheses that preserve the tree.
/// parse_predicate(to_string(p)) is structurally equal to p.
std::string to_string(const Predicate& p);

/// Every column name the predicate reads, in first-use order.
std::vector<std::string> referenced_columns(const Predicate& p);

/// Throws Error(TypeError) when a column is missing or its type cannot be
/// compared with the literal.
void check_predicate(const Predicate& p, const Schema& schema);

/// A predicate resolved against one schema, evaluated a batch at a time.
class BoundPredicate {
 public:
  BoundPredicate(PredicatePtr predicate, const Schema& schema);

  /// One byte per row, 1 where the predicate holds.
  std::vector<std::uint8_t> evaluate(const RecordBatch& batch) const;
  /// Row indices where the predicate holds.
  std::vector<std::uint32_t> select(const RecordBatch& batch) const;

 private:
  struct Node;
  std::shared_ptr<const Node> root_;
};

}  // namespace dacp::dag
