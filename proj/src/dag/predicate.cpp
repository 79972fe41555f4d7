// SPDX-License-Identifier: Apache-2.0
#include "dacp/dag/predicate.hpp"

#include <charconv>
#include <cstring>

#include "dacp/error.hpp"
#include "lexer.hpp"

namespace dacp::dag {

using detail::Tok;
using detail::Token;

std::string_view to_string(CmpOp op) {
  switch (op) {
    case CmpOp::Eq: return "=";
    case CmpOp::Ne: return "!=";
    case CmpOp::Lt: return "<";
    case CmpOp::Le: return "<=";
    case CmpOp::Gt: return ">";
    case CmpOp::Ge: return ">=";
  }
  return "?";
}

PredicatePtr Predicate::compare(std::string column, CmpOp op, Literal literal) {
  auto p = std::make_shared<Predicate>();
  p->kind = Kind::Compare;
  p->column = std::move(column);
  p->op = op;
  p->literal = std::move(literal);
  return p;
}

PredicatePtr Predicate::conj(PredicatePtr a, PredicatePtr b) {
  auto p = std::make_shared<Predicate>();
  p->kind = Kind::And;
  p->lhs = std::move(a);
  p->rhs = std::move(b);
  return p;
}

PredicatePtr Predicate::disj(PredicatePtr a, PredicatePtr b) {
  auto p = std::make_shared<Predicate>();
  p->kind = Kind::Or;
  p->lhs = std::move(a);
  p->rhs = std::move(b);
  return p;
}

PredicatePtr Predicate::negate(PredicatePtr a) {
  auto p = std::make_shared<Predicate>();
  p->kind = Kind::Not;
  p->lhs = std::move(a);
  return p;
}

namespace {

bool literal_equal(const Literal& a, const Literal& b) {
  if (a.index() != b.index()) return false;
  if (const double* x = std::get_if<double>(&a)) {
    const double y = std::get<double>(b);
    return std::memcmp(x, &y, sizeof y) == 0;
  }
  return a == b;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : toks_(detail::tokenize(text, "predicate")) {}

  PredicatePtr parse() {
    auto p = parse_or();
    if (peek().kind != Tok::End) fail("unexpected '" + peek().text + "'");
    return p;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& take() { return toks_[pos_++]; }
  [[noreturn]] void fail(const std::string& msg) const { detail::parse_fail("predicate", peek().offset, msg); }

  PredicatePtr parse_or() {
    auto left = parse_and();
    while (detail::keyword_is(peek(), "or")) {
      take();
      left = Predicate::disj(left, parse_and());
    }
    return left;
  }

  PredicatePtr parse_and() {
    auto left = parse_not();
    while (detail::keyword_is(peek(), "and")) {
      take();
      left = Predicate::conj(left, parse_not());
    }
    return left;
  }

  PredicatePtr parse_not() {
    if (detail::keyword_is(peek(), "not")) {
      take();
      return Predicate::negate(parse_not());
    }
    if (peek().kind == Tok::LParen) {
      take();
      auto inner = parse_or();
      if (peek().kind != Tok::RParen) fail("expected ')'");
      take();
      return inner;
    }
    return parse_cmp();
  }

  PredicatePtr parse_cmp() {
    const Token& id = peek();
    bool is_ident = id.kind == Tok::QuotedIdent ||
                    (id.kind == Tok::Ident && detail::is_bare_identifier(id.text));
    if (!is_ident) fail("expected column name");
    std::string column = take().text;
    CmpOp op;
    switch (peek().kind) {
      case Tok::Eq: op = CmpOp::Eq; break;
      case Tok::Ne: op = CmpOp::Ne; break;
      case Tok::Lt: op = CmpOp::Lt; break;
      case Tok::Le: op = CmpOp::Le; break;
      case Tok::Gt: op = CmpOp::Gt; break;
      case Tok::Ge: op = CmpOp::Ge; break;
      default: fail("expected comparison operator");
    }
    take();
    return Predicate::compare(std::move(column), op, parse_literal());
  }

  Literal parse_literal() {
    if (detail::keyword_is(peek(), "true")) {
      take();
      return true;
    }
    if (detail::keyword_is(peek(), "false")) {
      take();
      return false;
    }
    if (peek().kind == Tok::String) return take().text;
    bool negative = false;
    if (peek().kind == Tok::Minus) {
      take();
      negative = true;
    }
    if (peek().kind != Tok::Integer && peek().kind != Tok::Decimal) fail("expected literal");
    std::string spelled = (negative ? "-" : "") + peek().text;
    const char* b = spelled.data();
    const char* e = b + spelled.size();
    if (peek().kind == Tok::Integer) {
      std::int64_t v = 0;
      auto [p, ec] = std::from_chars(b, e, v);
      if (ec != std::errc() || p != e) fail("integer literal out of range");
      take();
      return v;
    }
    double v = 0;
    auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || p != e) fail("decimal literal out of range");
    take();
    return v;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

int precedence(const Predicate& p) {
  switch (p.kind) {
    case Predicate::Kind::Or: return 1;
    case Predicate::Kind::And: return 2;
    case Predicate::Kind::Not: return 3;
    case Predicate::Kind::Compare: return 4;
  }
  return 4;
}

std::string literal_text(const Literal& lit) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, bool>) {
          return v ? "true" : "false";
        } else if constexpr (std::is_same_v<T, std::int64_t>) {
          return std::to_string(v);
        } else if constexpr (std::is_same_v<T, double>) {
          return detail::format_decimal(v);
        } else {
          std::string out = "'";
          for (char c : v) {
            if (c == '\'') out.push_back('\'');
            out.push_back(c);
          }
          out.push_back('\'');
          return out;
        }
      },
      lit);
}

void print(const Predicate& p, int min_prec, std::string& out) {
  const bool wrap = precedence(p) < min_prec;
  if (wrap) out.push_back('(');
  switch (p.kind) {
    case Predicate::Kind::Compare:
      out += detail::quote_identifier(p.column);
      out.push_back(' ');
      out += to_string(p.op);
      out.push_back(' ');
      out += literal_text(p.literal);
      break;
    case Predicate::Kind::Not:
      out += "NOT ";
      print(*p.lhs, 3, out);
      break;
    case Predicate::Kind::And:
      print(*p.lhs, 2, out);
      out += " AND ";
      print(*p.rhs, 3, out);
      break;
    case Predicate::Kind::Or:
      print(*p.lhs, 1, out);
      out += " OR ";
      print(*p.rhs, 2, out);
      break;
  }
  if (wrap) out.push_back(')');
}

void collect(const Predicate& p, std::vector<std::string>& out) {
  if (p.kind == Predicate::Kind::Compare) {
    for (const auto& c : out) {
      if (c == p.column) return;
    }
    out.push_back(p.column);
    return;
  }
  collect(*p.lhs, out);
  if (p.rhs) collect(*p.rhs, out);
}

enum class LitClass { Bool, Integer, Decimal, Text };

LitClass classify(const Literal& l) {
  switch (l.index()) {
    case 0: return LitClass::Bool;
    case 1: return LitClass::Integer;
    case 2: return LitClass::Decimal;
    default: return LitClass::Text;
  }
}

bool comparable(DataType t, const Literal& l) {
  switch (classify(l)) {
    case LitClass::Bool: return t == DataType::Bool;
    case LitClass::Integer:
    case LitClass::Decimal: return is_numeric(t);
    case LitClass::Text: return t == DataType::Utf8;
  }
  return false;
}

template <typename A, typename B>
bool apply(CmpOp op, const A& a, const B& b) {
  switch (op) {
    case CmpOp::Eq: return a == b;
    case CmpOp::Ne: return a != b;
    case CmpOp::Lt: return a < b;
    case CmpOp::Le: return a <= b;
    case CmpOp::Gt: return a > b;
    case CmpOp::Ge: return a >= b;
  }
  return false;
}

}  // namespace

bool equal(const Predicate& a, const Predicate& b) {
  if (a.kind != b.kind) return false;
  if (a.kind == Predicate::Kind::Compare) {
    return a.column == b.column && a.op == b.op && literal_equal(a.literal, b.literal);
  }
  if (!equal(*a.lhs, *b.lhs)) return false;
  return a.kind == Predicate::Kind::Not || equal(*a.rhs, *b.rhs);
}

PredicatePtr parse_predicate(std::string_view text) { return Parser(text).parse(); }

std::string to_string(const Predicate& p) {
  std::string out;
  print(p, 0, out);
  return out;
}

std::vector<std::string> referenced_columns(const Predicate& p) {
  std::vector<std::string> out;
  collect(p, out);
  return out;
}

void check_predicate(const Predicate& p, const Schema& schema) {
  if (p.kind != Predicate::Kind::Compare) {
    check_predicate(*p.lhs, schema);
    if (p.rhs) check_predicate(*p.rhs, schema);
    return;
  }
  auto idx = schema.index_of(p.column);
  if (!idx) throw Error::type_error("predicate references unknown column '" + p.column + "'");
  const DataType t = schema.field(*idx).type;
  if (!comparable(t, p.literal)) {
    throw Error::type_error("cannot compare column '" + p.column + "' of type " + std::string(type_name(t)) +
                            " with literal " + literal_text(p.literal));
  }
}

struct BoundPredicate::Node {
  Predicate::Kind kind;
  std::size_t column = 0;
  DataType type = DataType::Bool;
  CmpOp op = CmpOp::Eq;
  Literal literal;
  std::shared_ptr<const Node> lhs, rhs;
};

BoundPredicate::BoundPredicate(PredicatePtr predicate, const Schema& schema) {
  check_predicate(*predicate, schema);
  struct Binder {
    const Schema& schema;
    std::shared_ptr<const Node> bind(const Predicate& p) {
      auto n = std::make_shared<Node>();
      n->kind = p.kind;
      if (p.kind == Predicate::Kind::Compare) {
        n->column = *schema.index_of(p.column);
        n->type = schema.field(n->column).type;
        n->op = p.op;
        n->literal = p.literal;
      } else {
        n->lhs = bind(*p.lhs);
        if (p.rhs) n->rhs = bind(*p.rhs);
      }
      return n;
    }
  };
  root_ = Binder{schema}.bind(*predicate);
}

namespace {

// Integer and float values are widened to long double, which holds every
// int64 and every double exactly, so mixed comparisons never round.
void compare_column(const Column& col, DataType type, CmpOp op, const Literal& lit, std::vector<std::uint8_t>& out) {
  const std::size_t n = col.length();
  out.assign(n, 0);
  switch (type) {
    case DataType::Bool: {
      const bool v = std::get<bool>(lit);
      for (std::size_t i = 0; i < n; ++i) {
        if (col.is_valid(i)) out[i] = apply(op, col.bool_at(i), v);
      }
      return;
    }
    case DataType::Utf8: {
      const std::string_view v = std::get<std::string>(lit);
      for (std::size_t i = 0; i < n; ++i) {
        if (col.is_valid(i)) out[i] = apply(op, col.bytes_at(i), v);
      }
      return;
    }
    case DataType::Int32:
    case DataType::Int64: {
      if (const auto* iv = std::get_if<std::int64_t>(&lit)) {
        for (std::size_t i = 0; i < n; ++i) {
          if (col.is_valid(i)) out[i] = apply(op, col.integral_as_int64(i), *iv);
        }
      } else {
        const long double v = std::get<double>(lit);
        for (std::size_t i = 0; i < n; ++i) {
          if (col.is_valid(i)) out[i] = apply(op, static_cast<long double>(col.integral_as_int64(i)), v);
        }
      }
      return;
    }
    case DataType::Float32:
    case DataType::Float64: {
      const long double v = std::holds_alternative<std::int64_t>(lit)
                                ? static_cast<long double>(std::get<std::int64_t>(lit))
                                : static_cast<long double>(std::get<double>(lit));
      for (std::size_t i = 0; i < n; ++i) {
        if (col.is_valid(i)) out[i] = apply(op, static_cast<long double>(col.numeric_as_double(i)), v);
      }
      return;
    }
    default: throw Error::type_error("column type " + std::string(type_name(type)) + " is not comparable");
  }
}

}  // namespace

std::vector<std::uint8_t> BoundPredicate::evaluate(const RecordBatch& batch) const {
  struct Eval {
    const RecordBatch& batch;
    std::vector<std::uint8_t> run(const Node& n) {
      std::vector<std::uint8_t> out;
      switch (n.kind) {
        case Predicate::Kind::Compare:
          compare_column(batch.column(n.column), n.type, n.op, n.literal, out);
          break;
        case Predicate::Kind::Not:
          out = run(*n.lhs);
          for (auto& b : out) b = !b;
          break;
        case Predicate::Kind::And: {
          out = run(*n.lhs);
          auto r = run(*n.rhs);
          for (std::size_t i = 0; i < out.size(); ++i) out[i] = out[i] && r[i];
          break;
        }
        case Predicate::Kind::Or: {
          out = run(*n.lhs);
          auto r = run(*n.rhs);
          for (std::size_t i = 0; i < out.size(); ++i) out[i] = out[i] || r[i];
          break;
        }
      }
      return out;
    }
  };
  return Eval{batch}.run(*root_);
}

std::vector<std::uint32_t> BoundPredicate::select(const RecordBatch& batch) const {
  auto mask = evaluate(batch);
  std::vector<std::uint32_t> idx;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) idx.push_back(static_cast<std::uint32_t>(i));
  }
  return idx;
}

}  // namespace dacp::dag
