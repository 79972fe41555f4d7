// SPDX-License-Identifier: Apache-2.0
#include "dacp/wire/messages.hpp"

#include "dacp/util/utf8.hpp"
#include "dacp/wire/codec.hpp"

namespace dacp::wire {
namespace {

[[noreturn]] void bad_message(MsgType t, const std::string& m) {
  throw WireError(WireFault::MalformedMessage, std::string(to_string(t)) + ": " + m);
}

constexpr std::uint8_t kFlagProjection = 0x01;
constexpr std::uint8_t kFlagPredicate = 0x02;

struct Encoder {
  Bytes& out;
  ByteWriter w{out};

  void operator()(const Hello& m) {
    if (m.magic.size() != 4) throw WireError(WireFault::MalformedMessage, "HELLO magic must be 4 bytes");
    w.raw(m.magic);
    w.u16(m.version);
  }
  void operator()(const Auth& m) {
    w.u8(static_cast<std::uint8_t>(m.method));
    if (m.method == AuthMethod::Basic) {
      w.str(m.username);
      w.str(m.password);
    }
  }
  void operator()(const AuthOk& m) {
    w.str(m.token);
    w.u64(m.expiry);
  }
  void operator()(const Get& m) {
    w.str(m.token);
    w.str(m.uri);
    std::uint8_t flags = 0;
    if (m.projection) flags |= kFlagProjection;
    if (m.predicate) flags |= kFlagPredicate;
    w.u8(flags);
    if (m.projection) {
      w.u16(static_cast<std::uint16_t>(m.projection->size()));
      for (const auto& name : *m.projection) w.str(name);
    }
    if (m.predicate) w.str(*m.predicate);
    w.u32(m.initial_credit);
  }
  void operator()(const PutBegin& m) {
    w.str(m.token);
    w.str(m.uri);
    encode_schema_into(*m.schema, out);
  }
  void operator()(const Cook& m) {
    w.str(m.token);
    w.str(m.dag);
    w.u32(m.initial_credit);
  }
  void operator()(const CookPublish& m) {
    w.str(m.token);
    w.str(m.dag);
    w.u32(m.ttl_seconds);
  }
  void operator()(const SchemaMsg& m) { encode_schema_into(*m.schema, out); }
  void operator()(const BatchMsg& m) { w.raw(m.body); }
  void operator()(const EndStream& m) { w.u64(m.total_rows); }
  void operator()(const Credit& m) { w.u32(m.additional); }
  void operator()(const ErrorMsg& m) {
    w.u16(static_cast<std::uint16_t>(m.code));
    w.str(m.message);
  }
  void operator()(const PutAck& m) { w.u64(m.rows_written); }
  void operator()(const PublishOk& m) {
    w.str(m.stream_id);
    w.str(m.stream_token);
    w.u64(m.expiry);
    encode_schema_into(*m.schema, out);
  }
  void operator()(const Pull& m) {
    w.str(m.stream_id);
    w.str(m.stream_token);
    w.u32(m.initial_credit);
  }
};

std::string text(ByteReader& r, MsgType t, const char* what) {
  std::string s = r.str();
  if (!is_valid_utf8(s)) bad_message(t, std::string(what) + " is not UTF-8");
  return s;
}

SchemaPtr schema_rest(ByteReader& r) { return std::make_shared<const Schema>(decode_schema(r.rest())); }

}  // namespace

std::string_view to_string(MsgType t) {
  switch (t) {
    case MsgType::Hello: return "HELLO";
    case MsgType::Auth: return "AUTH";
    case MsgType::AuthOk: return "AUTH_OK";
    case MsgType::Get: return "GET";
    case MsgType::PutBegin: return "PUT_BEGIN";
    case MsgType::Cook: return "COOK";
    case MsgType::CookPublish: return "COOK_PUBLISH";
    case MsgType::Schema: return "SCHEMA";
    case MsgType::Batch: return "BATCH";
    case MsgType::EndStream: return "END_STREAM";
    case MsgType::Credit: return "CREDIT";
    case MsgType::Error: return "ERROR";
    case MsgType::PutAck: return "PUT_ACK";
    case MsgType::PublishOk: return "PUBLISH_OK";
    case MsgType::Pull: return "PULL";
  }
  return "UNKNOWN";
}

bool is_known_msg_type(std::uint8_t raw) {
  switch (raw) {
    case 0x01: case 0x02: case 0x03: case 0x04: case 0x05: case 0x06: case 0x07:
    case 0x10: case 0x11: case 0x12: case 0x13: case 0x14: case 0x15: case 0x16:
    case 0x20:
      return true;
    default:
      return false;
  }
}

MsgType message_type(const Message& m) {
  static constexpr MsgType kTypes[] = {
      MsgType::Hello,     MsgType::Auth,   MsgType::AuthOk,    MsgType::Get,    MsgType::PutBegin,
      MsgType::Cook,      MsgType::CookPublish, MsgType::Schema, MsgType::Batch, MsgType::EndStream,
      MsgType::Credit,    MsgType::Error,  MsgType::PutAck,    MsgType::PublishOk, MsgType::Pull,
  };
  return kTypes[m.index()];
}

Bytes encode_payload(const Message& m) {
  Bytes out;
  std::visit(Encoder{out}, m);
  return out;
}

Message decode_payload(MsgType type, ByteView payload) {
  ByteReader r(payload);
  Message msg;
  try {
    switch (type) {
      case MsgType::Hello: {
        Hello h;
        h.magic = std::string(as_chars(r.raw(4)));
        h.version = r.u16();
        msg = h;
        break;
      }
      case MsgType::Auth: {
        Auth a;
        std::uint8_t method = r.u8();
        if (method > 1) bad_message(type, "unknown auth method " + std::to_string(method));
        a.method = static_cast<AuthMethod>(method);
        if (a.method == AuthMethod::Basic) {
          a.username = text(r, type, "username");
          a.password = r.str();
        }
        msg = a;
        break;
      }
      case MsgType::AuthOk: {
        AuthOk a;
        a.token = text(r, type, "token");
        a.expiry = r.u64();
        msg = a;
        break;
      }
      case MsgType::Get: {
        Get g;
        g.token = text(r, type, "token");
        g.uri = text(r, type, "uri");
        std::uint8_t flags = r.u8();
        if (flags & ~(kFlagProjection | kFlagPredicate)) bad_message(type, "unknown flag bits");
        if (flags & kFlagProjection) {
          std::uint16_t n = r.u16();
          std::vector<std::string> names;
          names.reserve(n);
          for (std::uint16_t i = 0; i < n; ++i) names.push_back(text(r, type, "projection name"));
          g.projection = std::move(names);
        }
        if (flags & kFlagPredicate) g.predicate = text(r, type, "predicate");
        g.initial_credit = r.u32();
        msg = std::move(g);
        break;
      }
      case MsgType::PutBegin: {
        PutBegin p;
        p.token = text(r, type, "token");
        p.uri = text(r, type, "uri");
        p.schema = schema_rest(r);
        msg = std::move(p);
        break;
      }
      case MsgType::Cook: {
        Cook c;
        c.token = text(r, type, "token");
        c.dag = text(r, type, "dag document");
        c.initial_credit = r.u32();
        msg = std::move(c);
        break;
      }
      case MsgType::CookPublish: {
        CookPublish c;
        c.token = text(r, type, "token");
        c.dag = text(r, type, "dag document");
        c.ttl_seconds = r.u32();
        msg = std::move(c);
        break;
      }
      case MsgType::Schema:
        msg = SchemaMsg{schema_rest(r)};
        break;
      case MsgType::Batch: {
        ByteView body = r.rest();
        msg = BatchMsg{Bytes(body.begin(), body.end())};
        break;
      }
      case MsgType::EndStream:
        msg = EndStream{r.u64()};
        break;
      case MsgType::Credit:
        msg = Credit{r.u32()};
        break;
      case MsgType::Error: {
        ErrorMsg e;
        std::uint16_t code = r.u16();
        if (!is_known_error_code(code)) bad_message(type, "unknown error code " + std::to_string(code));
        e.code = static_cast<ErrorCode>(code);
        e.message = text(r, type, "message");
        msg = std::move(e);
        break;
      }
      case MsgType::PutAck:
        msg = PutAck{r.u64()};
        break;
      case MsgType::PublishOk: {
        PublishOk p;
        p.stream_id = text(r, type, "stream id");
        p.stream_token = text(r, type, "stream token");
        p.expiry = r.u64();
        p.schema = schema_rest(r);
        msg = std::move(p);
        break;
      }
      case MsgType::Pull: {
        Pull p;
        p.stream_id = text(r, type, "stream id");
        p.stream_token = text(r, type, "stream token");
        p.initial_credit = r.u32();
        msg = std::move(p);
        break;
      }
      default:
        bad_message(type, "unknown message type");
    }
  } catch (const TruncatedInput& t) {
    bad_message(type, "truncated at byte " + std::to_string(t.position));
  }
  if (!r.at_end()) bad_message(type, std::to_string(r.remaining()) + " trailing bytes");
  return msg;
}

}  // namespace dacp::wire
