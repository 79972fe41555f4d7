// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "dacp/sdf/record_batch.hpp"

namespace dacp::dag {

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// Arithmetic over numeric columns for op.map.
struct Expr {
  enum class Kind : std::uint8_t { Column, Integer, Decimal, Neg, Add, Sub, Mul, Div };

  Kind kind = Kind::Integer;
  std::string column;
  std::int64_t integer = 0;
  double decimal = 0;
  ExprPtr lhs;
  ExprPtr rhs;

  static ExprPtr col(std::string name);
  static ExprPtr int_lit(std::int64_t v);
  static ExprPtr dec_lit(double v);
  static ExprPtr neg(ExprPtr a);
  static ExprPtr binary(Kind kind, ExprPtr a, ExprPtr b);
};

bool equal(const Expr& a, const Expr& b);

/// expr := term (("+" | "-") term)*
/// term := unary (("*" | "/") unary)*
/// unary := "-" unary | number | ident | "(" expr ")"
/// A minus directly before a number folds into a negative literal.
ExprPtr parse_expr(std::string_view text);

std::string to_string(const Expr& e);

std::vector<std::string> referenced_columns(const Expr& e);

/// Float64 if any operand is a float column or decimal literal, or any
/// division occurs; Int64 otherwise. Throws Error(TypeError) for unknown or
/// non-numeric columns.
DataType result_type(const Expr& e, const Schema& schema);

/// Expression resolved against a schema. Integer arithmetic wraps. Division
/// is floating point; an integer divided by integer zero gives null. Null
/// operands give null.
class BoundExpr {
 public:
  BoundExpr(ExprPtr expr, const Schema& schema);

  DataType type() const { return type_; }
  Column evaluate(const RecordBatch& batch) const;

 private:
  struct Node;
  std::shared_ptr<const Node> root_;
  DataType type_;
};

}  // namespace dacp::dag
