// SPDX-License-Identifier: Apache-2.0
#include "dacp/client/connection.hpp"

#include "dacp/client/frame_builder.hpp"
#include "dacp/error.hpp"
#include "dacp/net/channel.hpp"
#include "dacp/util/log.hpp"
#include "dacp/wire/codec.hpp"

namespace dacp::client {

using wire::Message;

struct Connection::Impl {
  Endpoint endpoint;
  Credentials credentials;
  ClientOptions options;
  std::unique_ptr<net::FrameChannel> channel;
  std::string token;
  std::uint64_t expiry = 0;
  std::size_t auths = 0;
  bool busy = false;
  std::string closed_reason;

  std::uint64_t now() const { return options.clock->now_unix(); }

  void ensure_usable() const {
    if (!channel) throw TransportError("connection to " + endpoint.to_string() + " is closed" +
                                       (closed_reason.empty() ? "" : ": " + closed_reason));
    if (busy) throw Error::bad_request("a stream is already in flight on this connection");
  }

  /// Tears the connection down; later calls fail locally.
  void fail(const std::string& reason) {
    if (channel) {
      channel->socket().shutdown();
      channel.reset();
    }
    closed_reason = reason;
    busy = false;
  }

  void send(const Message& m) {
    try {
      channel->send(m);
    } catch (const TransportError& e) {
      fail(e.what());
      throw;
    }
  }

  Message receive() {
    std::optional<Message> m;
    try {
      m = channel->receive();
    } catch (const Error& e) {
      fail(e.what());
      throw;
    }
    if (!m) {
      fail("closed by server");
      throw TransportError("connection closed by " + endpoint.to_string());
    }
    return std::move(*m);
  }

  [[noreturn]] void unexpected(const Message& m, std::string_view waiting_for) {
    const std::string what = "unexpected " + std::string(wire::to_string(wire::message_type(m))) +
                             " while waiting for " + std::string(waiting_for);
    fail(what);
    throw TransportError(what);
  }

  void authenticate() {
    wire::Auth auth;
    if (credentials.kind == Credentials::Kind::Basic) {
      auth.method = wire::AuthMethod::Basic;
      auth.username = credentials.username;
      auth.password = credentials.password;
    }
    send(auth);
    Message reply = receive();
    ++auths;
    if (auto* ok = std::get_if<wire::AuthOk>(&reply)) {
      token = ok->token;
      expiry = ok->expiry;
      return;
    }
    if (auto* err = std::get_if<wire::ErrorMsg>(&reply)) {
      fail("authentication failed");
      throw Error(err->code, err->message);
    }
    unexpected(reply, "AUTH_OK");
  }

  void before_request() {
    ensure_usable();
    if (credentials.kind == Credentials::Kind::Token) return;
    if (expiry <= now() + options.reauth_margin_seconds) {
      log::debug("client.reauth", {{"endpoint", endpoint.to_string()}, {"expiry", expiry}});
      authenticate();
    }
  }
};

namespace {

/// Client side of one SCHEMA, BATCH*, END_STREAM exchange.
class RemoteStream final : public BatchProducer {
 public:
  RemoteStream(std::shared_ptr<Connection::Impl> impl, SchemaPtr schema, std::optional<Message> deferred_request)
      : impl_(std::move(impl)), schema_(std::move(schema)), request_(std::move(deferred_request)) {
    impl_->busy = true;
    outstanding_ = impl_->options.window;
  }

  ~RemoteStream() override {
    if (!done_ && impl_->channel) impl_->fail("stream abandoned before END_STREAM");
  }

  /// Sends the request now and waits for SCHEMA; used for eager streams.
  static SchemaPtr start(Connection::Impl& impl, const Message& request) {
    impl.send(request);
    return await_schema(impl);
  }

  std::optional<RecordBatch> produce() override {
    if (done_) return std::nullopt;
    if (request_) {
      Message req = std::move(*request_);
      request_.reset();
      SchemaPtr got;
      try {
        got = start(*impl_, req);
      } catch (...) {
        done_ = true;
        impl_->busy = false;
        throw;
      }
      if (!(*got == *schema_)) {
        done_ = true;
        impl_->fail("schema mismatch");
        throw Error::type_error("stream schema " + got->to_string() + " differs from expected " +
                                schema_->to_string());
      }
    }
    Message m = next_message();
    if (auto* b = std::get_if<wire::BatchMsg>(&m)) {
      RecordBatch batch = decode(*b);
      --outstanding_;
      if (outstanding_ * 2 < impl_->options.window) {
        const std::uint32_t grant = impl_->options.window - outstanding_;
        impl_->send(wire::Credit{grant});
        outstanding_ += grant;
      }
      rows_ += batch.num_rows();
      return batch;
    }
    if (auto* end = std::get_if<wire::EndStream>(&m)) {
      done_ = true;
      impl_->busy = false;
      if (end->total_rows != rows_) {
        throw Error::internal("END_STREAM reports " + std::to_string(end->total_rows) + " rows, received " +
                              std::to_string(rows_));
      }
      return std::nullopt;
    }
    if (auto* err = std::get_if<wire::ErrorMsg>(&m)) {
      done_ = true;
      impl_->busy = false;
      throw Error(err->code, err->message);
    }
    done_ = true;
    impl_->unexpected(m, "BATCH or END_STREAM");
  }

 private:
  static SchemaPtr await_schema(Connection::Impl& impl) {
    Message m = impl.receive();
    if (auto* s = std::get_if<wire::SchemaMsg>(&m)) return s->schema;
    if (auto* err = std::get_if<wire::ErrorMsg>(&m)) throw Error(err->code, err->message);
    impl.unexpected(m, "SCHEMA");
  }

  Message next_message() {
    try {
      return impl_->receive();
    } catch (...) {
      done_ = true;
      throw;
    }
  }

  RecordBatch decode(const wire::BatchMsg& b) {
    try {
      RecordBatch batch = wire::decode_batch(b.body, schema_);
      auto v = validate_batch(*schema_, batch);
      if (!v.ok()) throw Error::type_error("server sent an invalid batch: " + v.detail);
      return batch;
    } catch (const Error&) {
      done_ = true;
      impl_->fail("bad batch from server");
      throw;
    }
  }

  std::shared_ptr<Connection::Impl> impl_;
  SchemaPtr schema_;
  std::optional<Message> request_;
  std::uint32_t outstanding_ = 0;
  std::uint64_t rows_ = 0;
  bool done_ = false;
};

StreamingDataFrame eager_stream(const std::shared_ptr<Connection::Impl>& impl, const Message& request) {
  impl->busy = true;
  SchemaPtr schema;
  try {
    schema = RemoteStream::start(*impl, request);
  } catch (...) {
    impl->busy = false;
    throw;
  }
  return StreamingDataFrame(schema, std::make_unique<RemoteStream>(impl, schema, std::nullopt));
}

}  // namespace

Connection::Connection(std::shared_ptr<Impl> impl) : impl_(std::move(impl)) {}
Connection::Connection(Connection&&) noexcept = default;
Connection& Connection::operator=(Connection&&) noexcept = default;
Connection::~Connection() = default;

Connection Connection::connect(const Endpoint& endpoint, Credentials credentials, ClientOptions options) {
  if (!options.clock) options.clock = system_clock();
  if (options.window == 0) options.window = 4;
  auto impl = std::make_shared<Impl>();
  impl->endpoint = endpoint;
  impl->credentials = std::move(credentials);
  impl->options = options;
  impl->channel = std::make_unique<net::FrameChannel>(net::connect_tcp(endpoint.host, endpoint.port, options.connect_timeout),
                                                      options.frame_cap, options.counters);
  impl->send(wire::Hello{});
  if (impl->credentials.kind == Credentials::Kind::Token) {
    impl->token = impl->credentials.token;
  } else {
    impl->authenticate();
  }
  return Connection(std::move(impl));
}

const Endpoint& Connection::endpoint() const { return impl_->endpoint; }
bool Connection::is_open() const { return impl_ && impl_->channel != nullptr; }
const std::string& Connection::token() const { return impl_->token; }
std::uint64_t Connection::token_expiry() const { return impl_->expiry; }
std::size_t Connection::auth_count() const { return impl_->auths; }

StreamingDataFrame Connection::get(const std::string& uri, std::optional<std::vector<std::string>> projection,
                                   std::optional<std::string> predicate) {
  impl_->before_request();
  wire::Get req{impl_->token, uri, std::move(projection), std::move(predicate), impl_->options.window};
  return eager_stream(impl_, req);
}

StreamingDataFrame Connection::cook(const dag::DagTask& task) { return cook(dag::to_json(task)); }

StreamingDataFrame Connection::cook(const std::string& dag_document) {
  impl_->before_request();
  return eager_stream(impl_, wire::Cook{impl_->token, dag_document, impl_->options.window});
}

std::uint64_t Connection::put(const std::string& uri, StreamingDataFrame data) {
  impl_->before_request();
  Impl& c = *impl_;
  c.send(wire::PutBegin{c.token, uri, data.schema_ptr()});
  c.busy = true;
  std::uint64_t rows = 0;
  auto check_early_error = [&] {
    std::optional<Message> m;
    try {
      m = c.channel->try_receive();
    } catch (const Error& e) {
      c.fail(e.what());
      throw;
    }
    if (!m) {
      if (c.channel->eof()) {
        c.fail("closed by server");
        throw TransportError("connection closed during PUT");
      }
      return;
    }
    if (auto* err = std::get_if<wire::ErrorMsg>(&*m)) {
      // The server discards batches until END_STREAM, then is ready again.
      c.send(wire::EndStream{rows});
      c.busy = false;
      throw Error(err->code, err->message);
    }
    c.unexpected(*m, "nothing during PUT");
  };
  try {
    while (auto batch = data.next_batch()) {
      for (const auto& piece : wire::split_to_fit(*batch, c.options.frame_cap)) {
        c.send(wire::BatchMsg{wire::encode_batch(piece)});
        rows += piece.num_rows();
      }
      check_early_error();
    }
  } catch (const Error& e) {
    // Local producer failures leave the server mid-upload: drop the
    // connection so the partial file is discarded.
    if (c.busy && c.channel) c.fail(std::string("upload aborted: ") + e.what());
    throw;
  } catch (...) {
    if (c.channel) c.fail("upload aborted");
    throw;
  }
  c.send(wire::EndStream{rows});
  Message reply = c.receive();
  c.busy = false;
  if (auto* ack = std::get_if<wire::PutAck>(&reply)) return ack->rows_written;
  if (auto* err = std::get_if<wire::ErrorMsg>(&reply)) throw Error(err->code, err->message);
  c.unexpected(reply, "PUT_ACK");
}

Publication Connection::publish(const dag::DagTask& task, std::uint32_t ttl_seconds) {
  impl_->before_request();
  impl_->send(wire::CookPublish{impl_->token, dag::to_json(task), ttl_seconds});
  Message reply = impl_->receive();
  if (auto* ok = std::get_if<wire::PublishOk>(&reply)) {
    return Publication{impl_->endpoint, ok->stream_id, ok->stream_token, ok->expiry, ok->schema};
  }
  if (auto* err = std::get_if<wire::ErrorMsg>(&reply)) throw Error(err->code, err->message);
  impl_->unexpected(reply, "PUBLISH_OK");
}

StreamingDataFrame Connection::pull(const std::string& stream_id, const std::string& stream_token,
                                    SchemaPtr expected_schema) {
  impl_->ensure_usable();
  wire::Pull req{stream_id, stream_token, impl_->options.window};
  if (!expected_schema) return eager_stream(impl_, req);
  return StreamingDataFrame(expected_schema, std::make_unique<RemoteStream>(impl_, expected_schema, req));
}

StreamingDataFrame Connection::expand(const BlobRef& blob) { return get(blob.uri); }

FrameBuilder Connection::frame(const std::string& uri) { return FrameBuilder(this, uri); }

void Connection::close() {
  if (impl_) impl_->fail("closed by client");
}

StreamingDataFrame pull_stream(const Endpoint& endpoint, const std::string& stream_id, const std::string& stream_token,
                               SchemaPtr expected_schema, ClientOptions options) {
  if (!expected_schema) {
    Connection conn = Connection::connect(endpoint, Credentials::bearer(""), std::move(options));
    return conn.pull(stream_id, stream_token, nullptr);
  }
  // Nothing touches the network until the first pull.
  auto remote = std::make_shared<std::optional<StreamingDataFrame>>();
  return StreamingDataFrame::from_function(
      expected_schema, [=]() -> std::optional<RecordBatch> {
        if (!*remote) {
          Connection conn = Connection::connect(endpoint, Credentials::bearer(""), options);
          remote->emplace(conn.pull(stream_id, stream_token, expected_schema));
        }
        return (*remote)->next_batch();
      });
}

}  // namespace dacp::client
