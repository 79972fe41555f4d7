// SPDX-License-Identifier: Apache-2.0
#include "dacp/uri.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include "dacp/error.hpp"
#include "dacp/util/utf8.hpp"

namespace dacp {
namespace {

constexpr std::string_view kScheme = "dacp://";

bool valid_host(std::string_view h) {
  if (h.empty()) return false;
  if (h.front() == '[') {
    if (h.size() < 3 || h.back() != ']') return false;
    return std::all_of(h.begin() + 1, h.end() - 1, [](char c) {
      return std::isxdigit(static_cast<unsigned char>(c)) || c == ':' || c == '.';
    });
  }
  return std::all_of(h.begin(), h.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.' || c == '_';
  });
}

std::optional<std::uint16_t> parse_port(std::string_view p, bool allow_zero) {
  if (p.empty() || p.size() > 5) return std::nullopt;
  unsigned v = 0;
  auto [ptr, ec] = std::from_chars(p.data(), p.data() + p.size(), v);
  if (ec != std::errc() || ptr != p.data() + p.size() || (v == 0 && !allow_zero) || v > 65535) return std::nullopt;
  return static_cast<std::uint16_t>(v);
}

std::optional<Endpoint> split_authority(std::string_view a, bool allow_zero = false) {
  std::size_t colon = a.rfind(':');
  if (colon == std::string_view::npos) return std::nullopt;
  std::string_view host = a.substr(0, colon);
  if (host.find(':') != std::string_view::npos && host.front() != '[') return std::nullopt;
  if (!valid_host(host)) return std::nullopt;
  auto port = parse_port(a.substr(colon + 1), allow_zero);
  if (!port) return std::nullopt;
  std::string h(host);
  std::transform(h.begin(), h.end(), h.begin(), [](unsigned char c) { return std::tolower(c); });
  return Endpoint{std::move(h), *port};
}

}  // namespace

std::string Endpoint::to_string() const { return host + ":" + std::to_string(port); }

std::string Uri::authority() const { return host + ":" + std::to_string(port); }

std::string Uri::to_string() const {
  std::string out = std::string(kScheme) + authority() + "/" + dataset;
  if (!path.empty()) out += "/" + path;
  return out;
}

std::optional<Endpoint> parse_endpoint(std::string_view text) { return split_authority(text); }

std::optional<Endpoint> parse_listen_address(std::string_view text) { return split_authority(text, true); }

std::optional<Uri> parse_uri(std::string_view text) {
  if (!text.starts_with(kScheme)) return std::nullopt;
  if (text.find('\0') != std::string_view::npos || !is_valid_utf8(text)) return std::nullopt;
  std::string_view rest = text.substr(kScheme.size());
  std::size_t slash = rest.find('/');
  std::string_view authority = rest.substr(0, slash);
  auto ep = split_authority(authority);
  if (!ep) return std::nullopt;
  Uri uri;
  uri.host = std::move(ep->host);
  uri.port = ep->port;
  if (slash == std::string_view::npos) return uri;
  std::string_view path = rest.substr(slash + 1);
  std::size_t next = path.find('/');
  uri.dataset = std::string(path.substr(0, next));
  if (next != std::string_view::npos) {
    std::string_view tail = path.substr(next + 1);
    while (tail.ends_with('/')) tail.remove_suffix(1);
    uri.path = std::string(tail);
  }
  return uri;
}

Uri parse_uri_or_throw(std::string_view text) {
  auto uri = parse_uri(text);
  if (!uri) throw Error::bad_request("malformed dacp URI: '" + std::string(text) + "'");
  return *uri;
}

}  // namespace dacp
