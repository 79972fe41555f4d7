// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace dacp::dag::detail {

enum class Tok {
  Ident,       // bare identifier or keyword
  QuotedIdent, // "..." identifier, never a keyword
  Integer,
  Decimal,
  String,      // '...'
  Eq, Ne, Lt, Le, Gt, Ge,
  Plus, Minus, Star, Slash,
  LParen, RParen,
  End,
};

struct Token {
  Tok kind;
  std::string text;  // identifier/string contents unescaped; number spelling
  std::size_t offset;
};

/// Splits `src` into tokens. Throws Error(BadRequest) naming `what` and the
/// byte offset of the first unrecognized input.
std::vector<Token> tokenize(std::string_view src, std::string_view what);

bool keyword_is(const Token& t, std::string_view kw);
bool is_bare_identifier(std::string_view s);
std::string quote_identifier(std::string_view s);
std::string format_decimal(double v);

[[noreturn]] void parse_fail(std::string_view what, std::size_t offset, std::string_view message);

}  // namespace dacp::dag::detail
