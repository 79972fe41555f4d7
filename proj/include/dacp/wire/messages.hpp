// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dacp/error.hpp"
#include "dacp/sdf/types.hpp"
#include "dacp/util/bytes.hpp"

namespace dacp::wire {

enum class MsgType : std::uint8_t {
  Hello = 0x01,
  Auth = 0x02,
  AuthOk = 0x03,
  Get = 0x04,
  PutBegin = 0x05,
  Cook = 0x06,
  CookPublish = 0x07,
  Schema = 0x10,
  Batch = 0x11,
  EndStream = 0x12,
  Credit = 0x13,
  Error = 0x14,
  PutAck = 0x15,
  PublishOk = 0x16,
  Pull = 0x20,
};

std::string_view to_string(MsgType t);
bool is_known_msg_type(std::uint8_t raw);

inline constexpr std::uint16_t kProtocolVersion = 1;

struct Hello {
  std::string magic = "DACP";
  std::uint16_t version = kProtocolVersion;
  friend bool operator==(const Hello&, const Hello&) = default;
};

enum class AuthMethod : std::uint8_t { Anonymous = 0, Basic = 1 };

struct Auth {
  AuthMethod method = AuthMethod::Anonymous;
  std::string username;
  std::string password;
  friend bool operator==(const Auth&, const Auth&) = default;
};

struct AuthOk {
  std::string token;
  std::uint64_t expiry = 0;
  friend bool operator==(const AuthOk&, const AuthOk&) = default;
};

struct Get {
  std::string token;
  std::string uri;
  std::optional<std::vector<std::string>> projection;
  std::optional<std::string> predicate;
  std::uint32_t initial_credit = 0;
  friend bool operator==(const Get&, const Get&) = default;
};

struct PutBegin {
  std::string token;
  std::string uri;
  SchemaPtr schema;
  friend bool operator==(const PutBegin& a, const PutBegin& b) {
    return a.token == b.token && a.uri == b.uri && *a.schema == *b.schema;
  }
};

struct Cook {
  std::string token;
  std::string dag;
  std::uint32_t initial_credit = 0;
  friend bool operator==(const Cook&, const Cook&) = default;
};

struct CookPublish {
  std::string token;
  std::string dag;
  std::uint32_t ttl_seconds = 0;
  friend bool operator==(const CookPublish&, const CookPublish&) = default;
};

struct SchemaMsg {
  SchemaPtr schema;
  friend bool operator==(const SchemaMsg& a, const SchemaMsg& b) { return *a.schema == *b.schema; }
};

/// Batch body kept encoded; it is decoded against the stream's schema.
struct BatchMsg {
  Bytes body;
  friend bool operator==(const BatchMsg&, const BatchMsg&) = default;
};

struct EndStream {
  std::uint64_t total_rows = 0;
  friend bool operator==(const EndStream&, const EndStream&) = default;
};

struct Credit {
  std::uint32_t additional = 0;
  friend bool operator==(const Credit&, const Credit&) = default;
};

struct ErrorMsg {
  ErrorCode code = ErrorCode::Internal;
  std::string message;
  friend bool operator==(const ErrorMsg&, const ErrorMsg&) = default;
};

struct PutAck {
  std::uint64_t rows_written = 0;
  friend bool operator==(const PutAck&, const PutAck&) = default;
};

struct PublishOk {
  std::string stream_id;
  std::string stream_token;
  std::uint64_t expiry = 0;
  SchemaPtr schema;
  friend bool operator==(const PublishOk& a, const PublishOk& b) {
    return a.stream_id == b.stream_id && a.stream_token == b.stream_token && a.expiry == b.expiry &&
           *a.schema == *b.schema;
  }
};

struct Pull {
  std::string stream_id;
  std::string stream_token;
  std::uint32_t initial_credit = 0;
  friend bool operator==(const Pull&, const Pull&) = default;
};

using Message = std::variant<Hello, Auth, AuthOk, Get, PutBegin, Cook, CookPublish, SchemaMsg, BatchMsg,
                             EndStream, Credit, ErrorMsg, PutAck, PublishOk, Pull>;

MsgType message_type(const Message& m);

/// Serialises the payload (everything after the type byte).
Bytes encode_payload(const Message& m);
/// Parses a payload of the given type. Throws WireError(MalformedMessage),
/// or MalformedSchema for embedded schemas.
Message decode_payload(MsgType type, ByteView payload);

}  // namespace dacp::wire
