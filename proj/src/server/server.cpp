// SPDX-License-Identifier: Apache-2.0
#include "dacp/server/server.hpp"

#include <algorithm>
#include <condition_variable>
#include <deque>
#include <fstream>
#include <list>
#include <mutex>
#include <thread>

#include "dacp/dag/engine.hpp"
#include "dacp/dag/planner.hpp"
#include "dacp/datasource/csv.hpp"
#include "dacp/error.hpp"
#include "dacp/net/channel.hpp"
#include "dacp/util/crypto.hpp"
#include "dacp/util/log.hpp"
#include "dacp/wire/codec.hpp"

namespace dacp::server {

namespace fs = std::filesystem;
using wire::Message;

inline constexpr std::uint32_t kDefaultInitialCredit = 4;
inline constexpr std::uint32_t kMaxPublishTtl = 3600;

class Session;

struct Server::State {
  ServerConfig config;
  datasource::DatasetRegistry datasets;
  UserStore users;
  ServerOptions options;
  SessionTokens tokens;
  PublishRegistry published;
  std::shared_ptr<net::TrafficCounters> traffic = std::make_shared<net::TrafficCounters>();
  std::shared_ptr<datasource::SourceStats> stats = std::make_shared<datasource::SourceStats>();
  Endpoint listen;

  std::unique_ptr<net::Listener> listener;
  std::thread acceptor;
  std::thread reaper;
  mutable std::mutex mu;
  std::condition_variable cv;
  bool running = false;
  bool stopping = false;
  std::list<std::shared_ptr<Session>> sessions;

  std::uint64_t now() const { return options.clock->now_unix(); }

  void sweep() {
    const auto t = now();
    const auto reaped = published.sweep(t);
    const auto dropped = tokens.sweep(t);
    if (reaped || dropped) log::info("server.sweep", {{"streams_reaped", reaped}, {"tokens_dropped", dropped}});
  }
};

namespace {

/// The peer went away; the session ends without a reply.
struct PeerGone {};

/// A frame that is not allowed here. Answered with ERROR 4, then the
/// connection is closed.
struct ProtocolViolation {
  std::string message;
};

bool is_anonymous(const std::string& principal) { return principal.empty(); }

std::string lower_extension(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

}  // namespace

class Session {
 public:
  enum class Phase { AwaitHello, AwaitAuth, Ready, StreamingOut, ReceivingPut, Closed };

  Session(Server::State& server, net::Socket socket)
      : server_(server),
        peer_(socket.peer()),
        channel_(std::move(socket), server.config.frame_cap, server.traffic) {}

  std::thread thread;

  void run() {
    log::debug("server.connect", {{"peer", peer_}});
    try {
      while (phase_ != Phase::Closed) {
        std::optional<Message> m = channel_.receive();
        if (!m) break;
        dispatch(*m);
      }
    } catch (const PeerGone&) {
    } catch (const ProtocolViolation& v) {
      refuse(v.message);
    } catch (const wire::WireError& e) {
      refuse(e.what());
    } catch (const TransportError& e) {
      log::debug("server.transport", {{"peer", peer_}, {"error", e.what()}});
    } catch (const std::exception& e) {
      log::error("server.session_failed", {{"peer", peer_}, {"error", e.what()}});
    }
    phase_ = Phase::Closed;
    std::lock_guard lock(mu_);
    finished_ = true;
    channel_.socket().close();
    log::debug("server.disconnect", {{"peer", peer_}});
  }

  void interrupt() {
    std::lock_guard lock(mu_);
    if (!finished_) channel_.socket().shutdown();
  }

  bool finished() const {
    std::lock_guard lock(mu_);
    return finished_;
  }

 private:
  // ---- framing helpers -------------------------------------------------

  void send(const Message& m) { channel_.send(m); }

  void send_error(const Error& e) {
    log::info("server.error", {{"peer", peer_}, {"code", static_cast<int>(e.code())}, {"message", e.what()}});
    send(wire::ErrorMsg{e.code(), e.what()});
  }

  /// Best-effort ERROR 4 before closing.
  void refuse(const std::string& message) {
    log::info("server.refused", {{"peer", peer_}, {"message", message}});
    try {
      send(wire::ErrorMsg{ErrorCode::BadRequest, message});
    } catch (const std::exception&) {
    }
    phase_ = Phase::Closed;
  }

  Message receive_or_gone() {
    std::optional<Message> m = channel_.receive();
    if (!m) throw PeerGone{};
    return std::move(*m);
  }

  // ---- dispatch ----------------------------------------------------------

  void dispatch(Message& m) {
    const wire::MsgType type = wire::message_type(m);
    if (phase_ == Phase::AwaitHello) {
      auto* hello = std::get_if<wire::Hello>(&m);
      if (!hello) throw ProtocolViolation{"expected HELLO, got " + std::string(wire::to_string(type))};
      if (hello->magic != "DACP") throw ProtocolViolation{"bad magic"};
      if (hello->version != wire::kProtocolVersion) {
        throw ProtocolViolation{"unsupported protocol version " + std::to_string(hello->version)};
      }
      phase_ = Phase::AwaitAuth;
      return;
    }
    std::visit(
        [&](auto& msg) {
          using T = std::decay_t<decltype(msg)>;
          if constexpr (std::is_same_v<T, wire::Auth>) {
            authenticate(msg);
          } else if constexpr (std::is_same_v<T, wire::Get>) {
            guarded([&] { handle_get(msg); });
          } else if constexpr (std::is_same_v<T, wire::PutBegin>) {
            handle_put(msg);
          } else if constexpr (std::is_same_v<T, wire::Cook>) {
            guarded([&] { handle_cook(msg); });
          } else if constexpr (std::is_same_v<T, wire::CookPublish>) {
            guarded([&] { handle_publish(msg); });
          } else if constexpr (std::is_same_v<T, wire::Pull>) {
            guarded([&] { handle_pull(msg); });
          } else if constexpr (std::is_same_v<T, wire::Credit>) {
            // Late top-up for a stream that already ended.
          } else {
            throw ProtocolViolation{"unexpected " + std::string(wire::to_string(type))};
          }
        },
        m);
  }

  /// Errors raised before a stream starts become an ERROR reply; the
  /// connection stays usable.
  template <typename F>
  void guarded(F&& f) {
    try {
      f();
    } catch (const TransportError&) {
      throw;
    } catch (const wire::WireError& e) {
      send_error(Error(ErrorCode::BadRequest, e.what()));
    } catch (const Error& e) {
      send_error(e);
    }
  }

  void authenticate(const wire::Auth& auth) {
    std::string principal;
    if (auth.method == wire::AuthMethod::Anonymous) {
      if (!server_.datasets.has_public()) return auth_failed("anonymous access is not enabled");
    } else {
      if (auth.username.empty() || !server_.users.verify(auth.username, auth.password)) {
        return auth_failed("invalid username or password");
      }
      principal = auth.username;
    }
    auto token = server_.tokens.issue(server_.now(), server_.config.token_ttl_seconds, principal);
    send(wire::AuthOk{token.text(), token.expiry});
    phase_ = Phase::Ready;
    log::info("server.auth", {{"peer", peer_}, {"user", is_anonymous(principal) ? "<anonymous>" : principal}});
  }

  void auth_failed(const std::string& why) {
    log::info("server.auth_failed", {{"peer", peer_}, {"reason", why}});
    send(wire::ErrorMsg{ErrorCode::AuthFailed, why});
    phase_ = Phase::Closed;
  }

  std::string check_session_token(const std::string& token) {
    try {
      return server_.tokens.check(token, server_.now());
    } catch (const Error& e) {
      // Without AUTH and without a usable token the request is out of order.
      if (phase_ == Phase::AwaitAuth && e.code() == ErrorCode::Forbidden) {
        throw Error::bad_request("authenticate first");
      }
      throw;
    }
  }

  // ---- sources -----------------------------------------------------------

  void check_access(const Uri& uri, const std::string& principal) const {
    const auto* entry = server_.datasets.find(uri.dataset);
    if (!entry) throw Error::not_found("unknown dataset '" + uri.dataset + "'");
    if (entry->access == datasource::Access::Authenticated && is_anonymous(principal)) {
      throw Error::forbidden("dataset '" + uri.dataset + "' requires authentication");
    }
  }

  StreamingDataFrame open_get(const dag::DagNode& node, const std::string& principal) const {
    const Uri uri = parse_uri_or_throw(node.uri);
    if (server_.options.source_override) {
      if (auto sdf = server_.options.source_override(uri)) return std::move(*sdf);
    }
    check_access(uri, principal);
    datasource::OpenOptions opts;
    opts.batch_rows = server_.config.batch_size;
    opts.stats = server_.stats;
    return datasource::open_resource(datasource::resolve(uri, server_.datasets), opts);
  }

  StreamingDataFrame open_stream(const dag::DagNode& node) const {
    const auto ep = parse_endpoint(node.endpoint);
    if (!ep) throw Error::bad_request("bad endpoint '" + node.endpoint + "'");
    return client::pull_stream(*ep, node.stream_id, node.stream_token, node.stream_schema, server_.options.upstream);
  }

  void check_locality(const dag::DagTask& task) const {
    for (const auto& n : task.nodes) {
      if (n.kind != dag::NodeKind::SourceGet) continue;
      const Uri uri = parse_uri_or_throw(n.uri);
      if (uri.port != server_.listen.port) {
        throw Error::bad_request("dag node '" + n.id + "': " + n.uri + " is not served by this server");
      }
    }
  }

  /// Plans, type-checks and builds the pull chain. Sources are opened once;
  /// the handle used for schema inference is the one executed.
  StreamingDataFrame prepare(const dag::DagTask& planned, const std::string& principal) {
    std::map<std::string, StreamingDataFrame> opened;
    auto open = [this, principal](const dag::DagNode& n) {
      return n.kind == dag::NodeKind::SourceGet ? open_get(n, principal) : open_stream(n);
    };
    dag::infer_schema(planned, [&](const dag::DagNode& n) {
      auto it = opened.emplace(n.id, open(n)).first;
      return it->second.schema_ptr();
    });
    dag::ExecContext ctx;
    // The engine opens every source while building the chain, before
    // this function returns.
    ctx.open_source = [&opened, open](const dag::DagNode& n) {
      auto it = opened.find(n.id);
      if (it == opened.end()) return open(n);
      StreamingDataFrame sdf = std::move(it->second);
      opened.erase(it);
      return sdf;
    };
    return dag::execute(planned, ctx);
  }

  // ---- data plane ----------------------------------------------------------

  void handle_get(const wire::Get& req) {
    const std::string principal = check_session_token(req.token);
    parse_uri_or_throw(req.uri);
    if (req.projection && req.projection->empty()) throw Error::bad_request("empty projection");
    dag::DagNode node;
    node.id = "get";
    node.kind = dag::NodeKind::SourceGet;
    node.uri = req.uri;
    node.projection = req.projection;
    if (req.predicate) node.predicate = dag::parse_predicate(*req.predicate);
    dag::DagTask task;
    task.nodes.push_back(std::move(node));
    task.sink = "get";
    log::info("server.get", {{"peer", peer_}, {"uri", req.uri}});
    stream_out(prepare(task, principal), req.initial_credit);
  }

  void handle_cook(const wire::Cook& req) {
    const std::string principal = check_session_token(req.token);
    dag::DagTask task = dag::parse_dag(req.dag);
    check_locality(task);
    task = dag::plan(std::move(task));
    log::info("server.cook", {{"peer", peer_}, {"nodes", task.nodes.size()}});
    stream_out(prepare(task, principal), req.initial_credit);
  }

  void handle_publish(const wire::CookPublish& req) {
    const std::string principal = check_session_token(req.token);
    if (req.ttl_seconds < 1 || req.ttl_seconds > kMaxPublishTtl) {
      throw Error::bad_request("ttl_seconds must be in [1, " + std::to_string(kMaxPublishTtl) + "]");
    }
    dag::DagTask task = dag::parse_dag(req.dag);
    check_locality(task);
    task = dag::plan(std::move(task));
    // Opening a source reads at most its schema; no batch is produced.
    SchemaPtr schema = dag::infer_schema(task, [&](const dag::DagNode& n) -> SchemaPtr {
      if (n.kind == dag::NodeKind::SourceGet) return open_get(n, principal).schema_ptr();
      if (!n.stream_schema) {
        throw Error::bad_request("dag node '" + n.id + "': source.stream needs a schema to be published");
      }
      return n.stream_schema;
    });
    auto pub = server_.published.publish(std::move(task), principal, server_.now(), req.ttl_seconds);
    send(wire::PublishOk{pub.stream_id, pub.token.text(), pub.token.expiry, schema});
    log::info("server.publish", {{"peer", peer_}, {"stream_id", pub.stream_id}, {"ttl", req.ttl_seconds}});
  }

  void handle_pull(const wire::Pull& req) {
    auto claimed = server_.published.claim(req.stream_id, req.stream_token, server_.now());
    log::info("server.pull", {{"peer", peer_}, {"stream_id", req.stream_id}});
    stream_out(prepare(claimed.task, claimed.principal), req.initial_credit);
  }

  // ---- outbound streams ------------------------------------------------------

  void add_credit(std::uint32_t more) {
    credit_ = static_cast<std::uint32_t>(std::min<std::uint64_t>(std::uint64_t{credit_} + more, UINT32_MAX));
  }

  void on_stream_message(const Message& m) {
    if (auto* c = std::get_if<wire::Credit>(&m)) return add_credit(c->additional);
    throw ProtocolViolation{"unexpected " + std::string(wire::to_string(wire::message_type(m))) +
                            " while a stream is in flight"};
  }

  /// SCHEMA, then one BATCH per unit of credit, then END_STREAM once the
  /// source is exhausted. Production failures end the stream with ERROR.
  void stream_out(StreamingDataFrame sdf, std::uint32_t initial_credit) {
    phase_ = Phase::StreamingOut;
    credit_ = initial_credit == 0 ? kDefaultInitialCredit : initial_credit;
    send(wire::SchemaMsg{sdf.schema_ptr()});
    std::deque<RecordBatch> pending;
    std::uint64_t total = 0;
    while (true) {
      while (auto m = channel_.try_receive()) on_stream_message(*m);
      if (channel_.eof()) throw PeerGone{};
      if (credit_ == 0) {
        on_stream_message(receive_or_gone());
        continue;
      }
      if (pending.empty()) {
        std::optional<RecordBatch> batch;
        try {
          batch = sdf.next_batch();
          if (batch && batch->num_rows() > 0) {
            for (auto& piece : wire::split_to_fit(*batch, channel_.frame_cap())) pending.push_back(std::move(piece));
          }
        } catch (const TransportError& e) {
          send_error(Error(ErrorCode::Internal, std::string("upstream transfer failed: ") + e.what()));
          phase_ = Phase::Ready;
          return;
        } catch (const Error& e) {
          send_error(e);
          phase_ = Phase::Ready;
          return;
        } catch (const std::exception& e) {
          send_error(Error::internal(e.what()));
          phase_ = Phase::Ready;
          return;
        }
        if (!batch) break;
        if (pending.empty()) continue;
      }
      const RecordBatch& next = pending.front();
      total += next.num_rows();
      send(wire::BatchMsg{wire::encode_batch(next)});
      pending.pop_front();
      --credit_;
    }
    send(wire::EndStream{total});
    phase_ = Phase::Ready;
  }

  // ---- uploads -------------------------------------------------------------

  /// Swallows the rest of a rejected upload.
  void discard_upload() {
    while (true) {
      Message m = receive_or_gone();
      if (std::holds_alternative<wire::EndStream>(m)) return;
      if (std::holds_alternative<wire::BatchMsg>(m) || std::holds_alternative<wire::Credit>(m)) continue;
      throw ProtocolViolation{"unexpected " + std::string(wire::to_string(wire::message_type(m))) +
                              " during an upload"};
    }
  }

  class Upload {
   public:
    Upload(fs::path target, SchemaPtr schema) : target_(std::move(target)), schema_(std::move(schema)) {
      csv_ = lower_extension(target_) == ".csv";
      std::error_code ec;
      fs::create_directories(target_.parent_path(), ec);
      if (ec) throw Error::internal("cannot create " + target_.parent_path().string() + ": " + ec.message());
      temp_ = target_.parent_path() /
              ("." + target_.filename().string() + ".upload-" + crypto::hex_encode(crypto::random_bytes(8)));
      out_.open(temp_, std::ios::binary | std::ios::trunc);
      if (!out_) throw Error::internal("cannot create temporary file in " + target_.parent_path().string());
      if (csv_) {
        datasource::CsvWriter(out_).write_header(*schema_);
        check_io();
      }
    }

    ~Upload() {
      if (!committed_) {
        out_.close();
        std::error_code ec;
        fs::remove(temp_, ec);
        fs::remove(temp_.string() + ".schema", ec);
      }
    }

    void append(const wire::BatchMsg& msg) {
      RecordBatch batch = [&] {
        try {
          return wire::decode_batch(msg.body, schema_);
        } catch (const wire::WireError& e) {
          throw Error::type_error(std::string("batch does not match the declared schema: ") + e.what());
        }
      }();
      auto v = validate_batch(*schema_, batch);
      if (!v.ok()) throw Error::type_error("invalid batch: " + v.detail);
      if (csv_) {
        datasource::CsvWriter(out_).write_batch(batch);
      } else {
        const Column& index = batch.column(0);
        const Column& data = batch.column(1);
        for (std::size_t r = 0; r < batch.num_rows(); ++r) {
          if (index.int64_at(r) != static_cast<std::int64_t>(rows_ + r)) {
            throw Error::type_error("chunk_index " + std::to_string(index.int64_at(r)) + " out of sequence");
          }
          auto bytes = data.bytes_at(r);
          out_.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        }
      }
      check_io();
      rows_ += batch.num_rows();
    }

    std::uint64_t commit() {
      out_.flush();
      check_io();
      out_.close();
      std::error_code ec;
      if (csv_) {
        const fs::path sidecar = datasource::schema_sidecar_path(target_);
        const fs::path sidecar_temp = temp_.string() + ".schema";
        datasource::write_schema_sidecar(sidecar_temp, *schema_);
        fs::rename(sidecar_temp, sidecar, ec);
        if (ec) throw Error::internal("cannot move schema sidecar into place: " + ec.message());
      }
      fs::rename(temp_, target_, ec);
      if (ec) throw Error::internal("cannot move upload into place: " + ec.message());
      committed_ = true;
      return rows_;
    }

    std::uint64_t rows() const { return rows_; }

   private:
    void check_io() {
      if (!out_) throw Error::internal("write failed: " + temp_.string());
    }

    fs::path target_;
    fs::path temp_;
    SchemaPtr schema_;
    std::ofstream out_;
    bool csv_ = false;
    bool committed_ = false;
    std::uint64_t rows_ = 0;
  };

  fs::path put_target(const wire::PutBegin& req, const std::string& principal) const {
    const Uri uri = parse_uri_or_throw(req.uri);
    check_access(uri, principal);
    const auto* entry = server_.datasets.find(uri.dataset);
    if (!entry->writable) throw Error::forbidden("dataset '" + uri.dataset + "' is read-only");
    fs::path target = datasource::resolve_for_write(uri, server_.datasets);
    const std::string ext = lower_extension(target);
    if (ext == ".bin") {
      const Schema& expected = *datasource::binary_chunk_schema();
      bool same = req.schema->size() == expected.size();
      for (std::size_t i = 0; same && i < expected.size(); ++i) {
        same = req.schema->field(i).name == expected.field(i).name && req.schema->field(i).type == expected.field(i).type;
      }
      if (!same) throw Error::type_error(".bin uploads need schema " + expected.to_string());
    } else if (ext != ".csv") {
      throw Error::bad_request("uploads must target a .csv or .bin path");
    }
    if (target.filename().string().front() == '.') throw Error::bad_request("upload targets may not be hidden files");
    return target;
  }

  void handle_put(const wire::PutBegin& req) {
    phase_ = Phase::ReceivingPut;
    bool ended = false;
    try {
      const std::string principal = check_session_token(req.token);
      Upload upload(put_target(req, principal), req.schema);
      log::info("server.put", {{"peer", peer_}, {"uri", req.uri}});
      while (!ended) {
        Message m = receive_or_gone();
        if (auto* b = std::get_if<wire::BatchMsg>(&m)) {
          upload.append(*b);
        } else if (auto* end = std::get_if<wire::EndStream>(&m)) {
          ended = true;
          if (end->total_rows != upload.rows()) {
            throw Error::bad_request("END_STREAM reports " + std::to_string(end->total_rows) + " rows, received " +
                                     std::to_string(upload.rows()));
          }
        } else if (!std::holds_alternative<wire::Credit>(m)) {
          throw ProtocolViolation{"unexpected " + std::string(wire::to_string(wire::message_type(m))) +
                                  " during an upload"};
        }
      }
      const std::uint64_t rows = upload.commit();
      send(wire::PutAck{rows});
    } catch (const TransportError&) {
      throw;
    } catch (const wire::WireError& e) {
      throw ProtocolViolation{e.what()};
    } catch (const Error& e) {
      send_error(e);
      if (!ended) discard_upload();
    } catch (const fs::filesystem_error& e) {
      send_error(Error::internal(e.what()));
      if (!ended) discard_upload();
    }
    phase_ = Phase::Ready;
  }

  Server::State& server_;
  std::string peer_;
  net::FrameChannel channel_;
  Phase phase_ = Phase::AwaitHello;
  std::uint32_t credit_ = 0;
  mutable std::mutex mu_;
  bool finished_ = false;
};

// ---- Server --------------------------------------------------------------------

Server::Server(ServerConfig config, datasource::DatasetRegistry datasets, UserStore users, ServerOptions options)
    : state_(std::make_shared<State>()) {
  if (!options.clock) options.clock = system_clock();
  if (!options.upstream.clock) options.upstream.clock = options.clock;
  auto ep = parse_listen_address(config.listen);
  if (!ep) throw Error::bad_request("bad listen address '" + config.listen + "'");
  state_->listen = *ep;
  state_->config = std::move(config);
  state_->datasets = std::move(datasets);
  state_->users = std::move(users);
  state_->options = std::move(options);
}

std::unique_ptr<Server> Server::from_config(const ServerConfig& config, ServerOptions options) {
  datasource::DatasetRegistry datasets;
  if (!config.datasets_file.empty()) datasets = datasource::DatasetRegistry::load_file(config.datasets_file);
  UserStore users;
  if (!config.users_file.empty()) users = UserStore::load_file(config.users_file);
  return std::make_unique<Server>(config, std::move(datasets), std::move(users), std::move(options));
}

Server::~Server() { stop(); }

void Server::start() {
  State& s = *state_;
  std::lock_guard lock(s.mu);
  if (s.running) return;
  s.listener = std::make_unique<net::Listener>(s.listen.host, s.listen.port);
  s.listen.port = s.listener->port();
  s.running = true;
  s.stopping = false;
  log::info("server.listening", {{"endpoint", s.listen.to_string()}, {"datasets", s.datasets.entries().size()}});

  s.acceptor = std::thread([&s] {
    while (auto sock = s.listener->accept()) {
      std::lock_guard lock(s.mu);
      if (s.stopping) break;
      for (auto it = s.sessions.begin(); it != s.sessions.end();) {
        if ((*it)->finished()) {
          (*it)->thread.join();
          it = s.sessions.erase(it);
        } else {
          ++it;
        }
      }
      auto session = std::make_shared<Session>(s, std::move(*sock));
      session->thread = std::thread([session] { session->run(); });
      s.sessions.push_back(std::move(session));
    }
  });

  s.reaper = std::thread([&s] {
    std::unique_lock lock(s.mu);
    while (!s.stopping) {
      if (s.cv.wait_for(lock, s.options.reap_interval, [&] { return s.stopping; })) break;
      lock.unlock();
      s.sweep();
      lock.lock();
    }
  });
}

void Server::stop() {
  State& s = *state_;
  {
    std::lock_guard lock(s.mu);
    if (!s.running || s.stopping) return;
    s.stopping = true;
  }
  s.cv.notify_all();
  s.listener->shutdown();
  s.acceptor.join();
  s.reaper.join();
  std::list<std::shared_ptr<Session>> sessions;
  {
    std::lock_guard lock(s.mu);
    sessions.swap(s.sessions);
  }
  for (auto& session : sessions) session->interrupt();
  for (auto& session : sessions) session->thread.join();
  {
    std::lock_guard lock(s.mu);
    s.listener.reset();
    s.running = false;
  }
  s.cv.notify_all();
  log::info("server.stopped", {{"endpoint", s.listen.to_string()}});
}

void Server::wait() {
  State& s = *state_;
  std::unique_lock lock(s.mu);
  s.cv.wait(lock, [&] { return !s.running; });
}

bool Server::running() const {
  std::lock_guard lock(state_->mu);
  return state_->running;
}

std::uint16_t Server::port() const { return state_->listen.port; }
Endpoint Server::endpoint() const { return state_->listen; }
net::TrafficCounters& Server::traffic() { return *state_->traffic; }
datasource::SourceStats& Server::source_stats() { return *state_->stats; }
void Server::sweep_now() { state_->sweep(); }
std::size_t Server::live_published() const { return state_->published.live(); }

std::size_t Server::open_connections() const {
  std::lock_guard lock(state_->mu);
  return static_cast<std::size_t>(
      std::count_if(state_->sessions.begin(), state_->sessions.end(), [](const auto& s) { return !s->finished(); }));
}

}  // namespace dacp::server
