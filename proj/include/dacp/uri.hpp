// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace dacp {

/// dacp://host:port/[dataset]/path
///
/// `dataset` is the first path segment (empty when the URI names only the
/// server); `path` is everything after it, without a leading slash.
struct Uri {
  std::string host;
  std::uint16_t port = 0;
  std::string dataset;
  std::string path;

  /// "host:port", with IPv6 hosts bracketed.
  std::string authority() const;
  std::string to_string() const;

  friend bool operator==(const Uri&, const Uri&) = default;
};

/// Parses a dacp URI. Returns nullopt when the text does not follow the
/// grammar (scheme, non-empty host, decimal port in 1..65535).
std::optional<Uri> parse_uri(std::string_view text);

/// Same as parse_uri but throws Error(BadRequest).
Uri parse_uri_or_throw(std::string_view text);

/// Parses "host:port" (IPv6 as "[addr]:port").
struct Endpoint {
  std::string host;
  std::uint16_t port = 0;

  std::string to_string() const;
  friend bool operator==(const Endpoint&, const Endpoint&) = default;
};

std::optional<Endpoint> parse_endpoint(std::string_view text);
/// Like parse_endpoint, but port 0 (pick any free port) is allowed.
std::optional<Endpoint> parse_listen_address(std::string_view text);

}  // namespace dacp
