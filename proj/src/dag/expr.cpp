// SPDX-License-Identifier: Apache-2.0
#include "dacp/dag/expr.hpp"

#include <charconv>
#include <cmath>
#include <cstring>

#include "dacp/error.hpp"
#include "lexer.hpp"

namespace dacp::dag {

using detail::Tok;
using detail::Token;

ExprPtr Expr::col(std::string name) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Column;
  e->column = std::move(name);
  return e;
}

ExprPtr Expr::int_lit(std::int64_t v) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Integer;
  e->integer = v;
  return e;
}

ExprPtr Expr::dec_lit(double v) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Decimal;
  e->decimal = v;
  return e;
}

ExprPtr Expr::neg(ExprPtr a) {
  auto e = std::make_shared<Expr>();
  e->kind = Kind::Neg;
  e->lhs = std::move(a);
  return e;
}

ExprPtr Expr::binary(Kind kind, ExprPtr a, ExprPtr b) {
  auto e = std::make_shared<Expr>();
  e->kind = kind;
  e->lhs = std::move(a);
  e->rhs = std::move(b);
  return e;
}

bool equal(const Expr& a, const Expr& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Expr::Kind::Column: return a.column == b.column;
    case Expr::Kind::Integer: return a.integer == b.integer;
    case Expr::Kind::Decimal: return std::memcmp(&a.decimal, &b.decimal, sizeof(double)) == 0;
    case Expr::Kind::Neg: return equal(*a.lhs, *b.lhs);
    default: return equal(*a.lhs, *b.lhs) && equal(*a.rhs, *b.rhs);
  }
}

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : toks_(detail::tokenize(text, "expression")) {}

  ExprPtr parse() {
    auto e = parse_sum();
    if (peek().kind != Tok::End) fail("unexpected '" + peek().text + "'");
    return e;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const { return toks_[std::min(pos_ + ahead, toks_.size() - 1)]; }
  const Token& take() { return toks_[pos_++]; }
  [[noreturn]] void fail(const std::string& msg) const { detail::parse_fail("expression", peek().offset, msg); }

  ExprPtr parse_sum() {
    auto left = parse_product();
    while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
      auto kind = take().kind == Tok::Plus ? Expr::Kind::Add : Expr::Kind::Sub;
      left = Expr::binary(kind, left, parse_product());
    }
    return left;
  }

  ExprPtr parse_product() {
    auto left = parse_unary();
    while (peek().kind == Tok::Star || peek().kind == Tok::Slash) {
      auto kind = take().kind == Tok::Star ? Expr::Kind::Mul : Expr::Kind::Div;
      left = Expr::binary(kind, left, parse_unary());
    }
    return left;
  }

  ExprPtr parse_unary() {
    if (peek().kind == Tok::Minus) {
      const auto next = peek(1).kind;
      if (next == Tok::Integer || next == Tok::Decimal) {
        take();
        return number(true);
      }
      take();
      return Expr::neg(parse_unary());
    }
    switch (peek().kind) {
      case Tok::Integer:
      case Tok::Decimal: return number(false);
      case Tok::QuotedIdent: return Expr::col(take().text);
      case Tok::Ident:
        if (!detail::is_bare_identifier(peek().text)) fail("expected operand");
        return Expr::col(take().text);
      case Tok::LParen: {
        take();
        auto inner = parse_sum();
        if (peek().kind != Tok::RParen) fail("expected ')'");
        take();
        return inner;
      }
      default: fail("expected operand");
    }
  }

  ExprPtr number(bool negative) {
    std::string spelled = (negative ? "-" : "") + peek().text;
    const char* b = spelled.data();
    const char* e = b + spelled.size();
    if (peek().kind == Tok::Integer) {
      std::int64_t v = 0;
      auto [p, ec] = std::from_chars(b, e, v);
      if (ec != std::errc() || p != e) fail("integer literal out of range");
      take();
      return Expr::int_lit(v);
    }
    double v = 0;
    auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || p != e) fail("decimal literal out of range");
    take();
    return Expr::dec_lit(v);
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

int precedence(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::Add:
    case Expr::Kind::Sub: return 1;
    case Expr::Kind::Mul:
    case Expr::Kind::Div: return 2;
    case Expr::Kind::Neg: return 3;
    case Expr::Kind::Integer: return e.integer < 0 ? 3 : 4;
    case Expr::Kind::Decimal: return std::signbit(e.decimal) ? 3 : 4;
    default: return 4;
  }
}

void print(const Expr& e, int min_prec, std::string& out) {
  const bool wrap = precedence(e) < min_prec;
  if (wrap) out.push_back('(');
  switch (e.kind) {
    case Expr::Kind::Column: out += detail::quote_identifier(e.column); break;
    case Expr::Kind::Integer: out += std::to_string(e.integer); break;
    case Expr::Kind::Decimal: out += detail::format_decimal(e.decimal); break;
    case Expr::Kind::Neg:
    {
      out.push_back('-');
      // "-5" reads back as a literal, so numbers under a minus keep parens.
      const bool literal = e.lhs->kind == Expr::Kind::Integer || e.lhs->kind == Expr::Kind::Decimal;
      print(*e.lhs, literal ? 5 : 4, out);
      break;
    }
    default: {
      const char* sym = e.kind == Expr::Kind::Add   ? " + "
                        : e.kind == Expr::Kind::Sub ? " - "
                        : e.kind == Expr::Kind::Mul ? " * "
                                                    : " / ";
      const int p = precedence(e);
      print(*e.lhs, p, out);
      out += sym;
      print(*e.rhs, p + 1, out);
    }
  }
  if (wrap) out.push_back(')');
}

void collect(const Expr& e, std::vector<std::string>& out) {
  if (e.kind == Expr::Kind::Column) {
    for (const auto& c : out) {
      if (c == e.column) return;
    }
    out.push_back(e.column);
    return;
  }
  if (e.lhs) collect(*e.lhs, out);
  if (e.rhs) collect(*e.rhs, out);
}

bool is_float_type(const Expr& e, const Schema& schema) {
  switch (e.kind) {
    case Expr::Kind::Column: {
      auto idx = schema.index_of(e.column);
      if (!idx) throw Error::type_error("expression references unknown column '" + e.column + "'");
      DataType t = schema.field(*idx).type;
      if (!is_numeric(t)) {
        throw Error::type_error("expression column '" + e.column + "' has non-numeric type " +
                                std::string(type_name(t)));
      }
      return !is_integral(t);
    }
    case Expr::Kind::Integer: return false;
    case Expr::Kind::Decimal: return true;
    case Expr::Kind::Neg: return is_float_type(*e.lhs, schema);
    case Expr::Kind::Div:
      is_float_type(*e.lhs, schema);
      is_float_type(*e.rhs, schema);
      return true;
    default: {
      bool l = is_float_type(*e.lhs, schema);
      bool r = is_float_type(*e.rhs, schema);
      return l || r;
    }
  }
}

}  // namespace

ExprPtr parse_expr(std::string_view text) { return Parser(text).parse(); }

std::string to_string(const Expr& e) {
  std::string out;
  print(e, 0, out);
  return out;
}

std::vector<std::string> referenced_columns(const Expr& e) {
  std::vector<std::string> out;
  collect(e, out);
  return out;
}

DataType result_type(const Expr& e, const Schema& schema) {
  return is_float_type(e, schema) ? DataType::Float64 : DataType::Int64;
}

struct BoundExpr::Node {
  Expr::Kind kind;
  bool is_float = false;
  std::size_t column = 0;
  std::int64_t integer = 0;
  double decimal = 0;
  std::shared_ptr<const Node> lhs, rhs;
};

BoundExpr::BoundExpr(ExprPtr expr, const Schema& schema) : type_(result_type(*expr, schema)) {
  struct Binder {
    const Schema& schema;
    std::shared_ptr<const Node> bind(const Expr& e) {
      auto n = std::make_shared<Node>();
      n->kind = e.kind;
      n->is_float = is_float_type(e, schema);
      n->integer = e.integer;
      n->decimal = e.decimal;
      if (e.kind == Expr::Kind::Column) n->column = *schema.index_of(e.column);
      if (e.lhs) n->lhs = bind(*e.lhs);
      if (e.rhs) n->rhs = bind(*e.rhs);
      return n;
    }
  };
  root_ = Binder{schema}.bind(*expr);
}

namespace {

struct Vec {
  bool is_float = false;
  std::vector<std::int64_t> i;
  std::vector<double> d;
  std::vector<std::uint8_t> valid;

  double as_double(std::size_t k) const { return is_float ? d[k] : static_cast<double>(i[k]); }
};

std::int64_t wrap_add(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) + static_cast<std::uint64_t>(b));
}
std::int64_t wrap_sub(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) - static_cast<std::uint64_t>(b));
}
std::int64_t wrap_mul(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) * static_cast<std::uint64_t>(b));
}

}  // namespace

Column BoundExpr::evaluate(const RecordBatch& batch) const {
  const std::size_t n = batch.num_rows();
  struct Eval {
    const RecordBatch& batch;
    std::size_t n;

    Vec run(const Node& e) {
      Vec v;
      v.is_float = e.is_float;
      switch (e.kind) {
        case Expr::Kind::Column: {
          const Column& c = batch.column(e.column);
          v.valid.resize(n);
          if (v.is_float) v.d.resize(n); else v.i.resize(n);
          for (std::size_t k = 0; k < n; ++k) {
            v.valid[k] = c.is_valid(k);
            if (!v.valid[k]) continue;
            if (v.is_float) v.d[k] = c.numeric_as_double(k); else v.i[k] = c.integral_as_int64(k);
          }
          return v;
        }
        case Expr::Kind::Integer:
          v.valid.assign(n, 1);
          v.i.assign(n, e.integer);
          return v;
        case Expr::Kind::Decimal:
          v.valid.assign(n, 1);
          v.d.assign(n, e.decimal);
          return v;
        case Expr::Kind::Neg: {
          v = run(*e.lhs);
          if (v.is_float) {
            for (auto& x : v.d) x = -x;
          } else {
            for (auto& x : v.i) x = wrap_sub(0, x);
          }
          return v;
        }
        default: break;
      }
      Vec a = run(*e.lhs);
      Vec b = run(*e.rhs);
      v.valid.resize(n);
      for (std::size_t k = 0; k < n; ++k) v.valid[k] = a.valid[k] && b.valid[k];
      if (e.kind == Expr::Kind::Div) {
        const bool integer_div = !a.is_float && !b.is_float;
        v.d.assign(n, 0.0);
        for (std::size_t k = 0; k < n; ++k) {
          if (!v.valid[k]) continue;
          if (integer_div && b.i[k] == 0) {
            v.valid[k] = 0;
            continue;
          }
          v.d[k] = a.as_double(k) / b.as_double(k);
        }
        return v;
      }
      if (v.is_float) {
        v.d.assign(n, 0.0);
        for (std::size_t k = 0; k < n; ++k) {
          if (!v.valid[k]) continue;
          const double x = a.as_double(k), y = b.as_double(k);
          v.d[k] = e.kind == Expr::Kind::Add ? x + y : e.kind == Expr::Kind::Sub ? x - y : x * y;
        }
      } else {
        v.i.assign(n, 0);
        for (std::size_t k = 0; k < n; ++k) {
          if (!v.valid[k]) continue;
          const std::int64_t x = a.i[k], y = b.i[k];
          v.i[k] = e.kind == Expr::Kind::Add ? wrap_add(x, y) : e.kind == Expr::Kind::Sub ? wrap_sub(x, y) : wrap_mul(x, y);
        }
      }
      return v;
    }
  };
  Vec out = Eval{batch, n}.run(*root_);
  ColumnBuilder builder(type_, n);
  for (std::size_t k = 0; k < n; ++k) {
    if (!out.valid[k]) {
      builder.append_null();
    } else if (type_ == DataType::Float64) {
      builder.append_float64(out.as_double(k));
    } else {
      builder.append_int64(out.i[k]);
    }
  }
  return builder.finish();
}

}  // namespace dacp::dag
