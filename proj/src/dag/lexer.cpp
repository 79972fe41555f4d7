// SPDX-License-Identifier: Apache-2.0
#include "lexer.hpp"

#include <charconv>
#include <cmath>

#include "dacp/error.hpp"

namespace dacp::dag::detail {
namespace {

bool is_ident_start(char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_'; }
bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9') || c == '.'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

char lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (lower(a[i]) != lower(b[i])) return false;
  }
  return true;
}

constexpr std::string_view kKeywords[] = {"and", "or", "not", "true", "false"};

}  // namespace

void parse_fail(std::string_view what, std::size_t offset, std::string_view message) {
  throw Error::bad_request(std::string(what) + " parse error at offset " + std::to_string(offset) + ": " +
                           std::string(message));
}

std::vector<Token> tokenize(std::string_view src, std::string_view what) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < src.size()) {
    char c = src[i];
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      ++i;
      continue;
    }
    const std::size_t start = i;
    if (is_ident_start(c)) {
      while (i < src.size() && is_ident_char(src[i])) ++i;
      out.push_back({Tok::Ident, std::string(src.substr(start, i - start)), start});
      continue;
    }
    if (is_digit(c)) {
      bool decimal = false;
      while (i < src.size() && is_digit(src[i])) ++i;
      if (i < src.size() && src[i] == '.') {
        if (i + 1 >= src.size() || !is_digit(src[i + 1])) parse_fail(what, i + 1, "expected digit after '.'");
        decimal = true;
        ++i;
        while (i < src.size() && is_digit(src[i])) ++i;
      }
      if (i < src.size() && (src[i] == 'e' || src[i] == 'E')) {
        decimal = true;
        ++i;
        if (i < src.size() && (src[i] == '+' || src[i] == '-')) ++i;
        if (i >= src.size() || !is_digit(src[i])) parse_fail(what, i, "expected exponent digits");
        while (i < src.size() && is_digit(src[i])) ++i;
      }
      if (i < src.size() && is_ident_start(src[i])) parse_fail(what, i, "unexpected character after number");
      out.push_back({decimal ? Tok::Decimal : Tok::Integer, std::string(src.substr(start, i - start)), start});
      continue;
    }
    if (c == '\'' || c == '"') {
      const char q = c;
      std::string text;
      ++i;
      while (true) {
        if (i >= src.size()) parse_fail(what, start, q == '\'' ? "unterminated string" : "unterminated identifier");
        if (src[i] == q) {
          if (i + 1 < src.size() && src[i + 1] == q) {
            text.push_back(q);
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        text.push_back(src[i++]);
      }
      if (q == '"' && text.empty()) parse_fail(what, start, "empty quoted identifier");
      out.push_back({q == '\'' ? Tok::String : Tok::QuotedIdent, std::move(text), start});
      continue;
    }
    auto two = src.substr(i, 2);
    Tok kind;
    std::size_t len = 1;
    if (two == "!=" || two == "<>") {
      kind = Tok::Ne;
      len = 2;
    } else if (two == "<=") {
      kind = Tok::Le;
      len = 2;
    } else if (two == ">=") {
      kind = Tok::Ge;
      len = 2;
    } else if (two == "==") {
      kind = Tok::Eq;
      len = 2;
    } else {
      switch (c) {
        case '=': kind = Tok::Eq; break;
        case '<': kind = Tok::Lt; break;
        case '>': kind = Tok::Gt; break;
        case '+': kind = Tok::Plus; break;
        case '-': kind = Tok::Minus; break;
        case '*': kind = Tok::Star; break;
        case '/': kind = Tok::Slash; break;
        case '(': kind = Tok::LParen; break;
        case ')': kind = Tok::RParen; break;
        default: parse_fail(what, i, std::string("unexpected character '") + c + "'");
      }
    }
    out.push_back({kind, std::string(src.substr(i, len)), i});
    i += len;
  }
  out.push_back({Tok::End, "", src.size()});
  return out;
}

bool keyword_is(const Token& t, std::string_view kw) { return t.kind == Tok::Ident && iequals(t.text, kw); }

bool is_bare_identifier(std::string_view s) {
  if (s.empty() || !is_ident_start(s[0])) return false;
  for (char c : s) {
    if (!is_ident_char(c)) return false;
  }
  for (auto kw : kKeywords) {
    if (iequals(s, kw)) return false;
  }
  return true;
}

std::string quote_identifier(std::string_view s) {
  if (is_bare_identifier(s)) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string format_decimal(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v < 0 ? "-inf" : "inf";
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, p);
  if (s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

}  // namespace dacp::dag::detail
