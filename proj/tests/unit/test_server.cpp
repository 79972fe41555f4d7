// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <atomic>
#include <chrono>
#include <filesystem>
#include <random>
#include <thread>

#include "dacp/client/connection.hpp"
#include "dacp/client/frame_builder.hpp"
#include "dacp/dag/predicate.hpp"
#include "dacp/datasource/sources.hpp"
#include "dacp/federation/harness.hpp"
#include "dacp/util/crypto.hpp"
#include "dacp/wire/codec.hpp"
#include "dacp/wire/frame.hpp"
#include "support/fixtures.hpp"
#include "support/oracle.hpp"
#include "support/random_dag.hpp"
#include "support/raw_client.hpp"
#include "support/temp_dir.hpp"

using namespace dacp;
using namespace std::chrono_literals;
using dacp::federation::Cluster;
using dacp::testing::expect;
using dacp::testing::RawClient;

namespace fs = std::filesystem;

namespace {

Cluster::Options one_node() {
  Cluster::Options o;
  o.nodes = 1;
  return o;
}

client::Connection anon(const Cluster& c, std::size_t i = 0, client::ClientOptions opts = {}) {
  return client::Connection::connect(c.endpoint(i), client::Credentials::anonymous(), opts);
}

template <typename F>
ErrorCode error_code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::Internal;
}

std::vector<std::int64_t> int_column(const std::vector<Row>& rows, std::size_t col) {
  std::vector<std::int64_t> out;
  for (const auto& r : rows) out.push_back(std::get<std::int64_t>(r.at(col)));
  return out;
}

/// Reads a raw stream reply: SCHEMA, BATCH*, END_STREAM or ERROR.
struct RawStream {
  std::size_t batches = 0;
  std::uint64_t rows = 0;
  std::optional<std::uint64_t> end_total;
  std::optional<wire::ErrorMsg> error;
};

RawStream read_stream(RawClient& raw, bool expect_schema = true) {
  RawStream s;
  if (expect_schema) {
    auto first = raw.recv();
    if (auto* err = std::get_if<wire::ErrorMsg>(&first)) {
      s.error = *err;
      return s;
    }
    expect<wire::SchemaMsg>(first);
  }
  while (true) {
    auto m = raw.recv();
    if (auto* b = std::get_if<wire::BatchMsg>(&m)) {
      ++s.batches;
      ByteView body(b->body);
      s.rows += static_cast<std::uint64_t>(body[0]) | static_cast<std::uint64_t>(body[1]) << 8 |
                static_cast<std::uint64_t>(body[2]) << 16 | static_cast<std::uint64_t>(body[3]) << 24;
      raw.send(wire::Credit{1});
    } else if (auto* e = std::get_if<wire::EndStream>(&m)) {
      s.end_total = e->total_rows;
      return s;
    } else {
      s.error = expect<wire::ErrorMsg>(m);
      return s;
    }
  }
}

}  // namespace

TEST_SUITE("handshake") {
  TEST_CASE("anonymous AUTH against public datasets yields a session token") {
    Cluster c(one_node());
    auto conn = anon(c);
    CHECK(conn.is_open());
    CHECK(conn.token().size() == wire::kTokenTextLength);
    CHECK(conn.token_expiry() > 0);
    CHECK(conn.auth_count() == 1);
  }

  TEST_CASE("bad credentials: AUTH_FAILED with the server message, then close") {
    auto opts = one_node();
    opts.users = {{"alice", "correct horse"}};
    Cluster c(opts);
    CHECK(client::Connection::connect(c.endpoint(0), client::Credentials::basic("alice", "correct horse")).is_open());
    try {
      client::Connection::connect(c.endpoint(0), client::Credentials::basic("alice", "wrong"));
      FAIL("connect succeeded");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::AuthFailed);
      CHECK(std::string(e.what()).find("invalid username or password") != std::string::npos);
    }
    RawClient raw(c.endpoint(0));
    raw.send(wire::Hello{});
    raw.send(wire::Auth{wire::AuthMethod::Basic, "bob", "x"});
    CHECK(expect<wire::ErrorMsg>(raw.recv()).code == ErrorCode::AuthFailed);
    CHECK(raw.closed_by_peer());
  }

  TEST_CASE("anonymous AUTH fails when no dataset is public") {
    auto opts = one_node();
    opts.access = datasource::Access::Authenticated;
    Cluster c(opts);
    CHECK(error_code_of([&] { anon(c); }) == ErrorCode::AuthFailed);
  }

  TEST_CASE("GET before AUTH is BAD_REQUEST") {
    Cluster c(one_node());
    RawClient raw(c.endpoint(0));
    raw.send(wire::Hello{});
    raw.send(wire::Get{"", c.uri(0, "t.csv"), std::nullopt, std::nullopt, 4});
    CHECK(expect<wire::ErrorMsg>(raw.recv()).code == ErrorCode::BadRequest);
  }

  TEST_CASE("first frame must be HELLO v1") {
    Cluster c(one_node());
    {
      RawClient raw(c.endpoint(0));
      raw.send(wire::Auth{});
      CHECK(expect<wire::ErrorMsg>(raw.recv()).code == ErrorCode::BadRequest);
      CHECK(raw.closed_by_peer());
    }
    {
      RawClient raw(c.endpoint(0));
      raw.send(wire::Hello{"DACP", 2});
      CHECK(expect<wire::ErrorMsg>(raw.recv()).code == ErrorCode::BadRequest);
      CHECK(raw.closed_by_peer());
    }
    {
      RawClient raw(c.endpoint(0));
      raw.send(wire::Hello{"ABCD", 1});
      CHECK(expect<wire::ErrorMsg>(raw.recv()).code == ErrorCode::BadRequest);
    }
  }

  TEST_CASE("unknown message type and oversized frames close the connection") {
    Cluster c(one_node());
    {
      RawClient raw(c.endpoint(0));
      raw.handshake();
      const std::uint8_t junk[] = {0x01, 0x00, 0x00, 0x00, 0x99};
      raw.send_bytes(ByteView(junk, sizeof junk));
      CHECK(expect<wire::ErrorMsg>(raw.recv()).code == ErrorCode::BadRequest);
      CHECK(raw.closed_by_peer());
    }
    {
      RawClient raw(c.endpoint(0));
      raw.handshake();
      const std::uint8_t huge[] = {0x00, 0x00, 0x40, 0x01, 0x13};  // 20 MiB
      raw.send_bytes(ByteView(huge, sizeof huge));
      CHECK(expect<wire::ErrorMsg>(raw.recv()).code == ErrorCode::BadRequest);
      CHECK(raw.closed_by_peer());
    }
  }

  TEST_CASE("teardown refuses new connections") {
    auto c = std::make_unique<Cluster>(one_node());
    const Endpoint ep = c->endpoint(0);
    c.reset();
    CHECK_THROWS_AS(client::Connection::connect(ep, client::Credentials::anonymous()), TransportError);
  }
}

TEST_SUITE("get") {
  TEST_CASE("full table, predicate pushdown and END_STREAM total") {
    Cluster c(one_node());
    testing::write_text(c.data_dir(0) / "t.csv", "x\n1\n2\n3\n4\n5\n6\n");
    auto conn = anon(c);
    auto all = conn.get(c.uri(0, "t.csv")).collect_rows();
    CHECK(int_column(all, 0) == std::vector<std::int64_t>{1, 2, 3, 4, 5, 6});

    RawClient raw(c.endpoint(0));
    const auto token = raw.handshake();
    raw.send(wire::Get{token, c.uri(0, "t.csv"), std::nullopt, std::string("x > 3"), 4});
    auto s = read_stream(raw);
    REQUIRE_FALSE(s.error);
    CHECK(s.rows == 3);
    CHECK(s.end_total == 3u);

    auto filtered = conn.get(c.uri(0, "t.csv"), std::nullopt, std::string("x > 3")).collect_rows();
    CHECK(int_column(filtered, 0) == std::vector<std::int64_t>{4, 5, 6});
  }

  TEST_CASE("predicated GET equals client-side filtering of the full GET") {
    Cluster c(one_node());
    testing::write_text(c.data_dir(0) / "n.csv", testing::numbered_csv(5000, 37));
    auto conn = anon(c);
    const std::string pred = "x < 5 or label = 'row4999'";
    auto remote = conn.get(c.uri(0, "n.csv"), std::vector<std::string>{"label", "id"}, pred).collect_rows();

    auto full = conn.get(c.uri(0, "n.csv"));
    dag::BoundPredicate bound(dag::parse_predicate(pred), full.schema());
    std::vector<Row> local;
    while (auto b = full.next_batch()) {
      for (auto r : bound.select(*b)) {
        local.push_back({b->column(2).value(r), b->column(0).value(r)});
      }
    }
    REQUIRE(remote.size() == local.size());
    for (std::size_t i = 0; i < local.size(); ++i) CHECK(same_row(remote[i], local[i]));
  }

  TEST_CASE("directory GET is a six-column file list") {
    Cluster c(one_node());
    testing::write_text(c.data_dir(0) / "a.csv", "x\n1\n");
    testing::write_text(c.data_dir(0) / "b.bin", "abc");
    auto conn = anon(c);
    auto sdf = conn.get(c.uri(0, ""));
    CHECK(sdf.schema() == *datasource::file_list_schema());
    CHECK(sdf.schema().size() == 6);
    auto rows = sdf.collect_rows();
    REQUIRE(rows.size() == 2);
    CHECK(std::get<std::string>(rows[0][0]) == "a.csv");
  }

  TEST_CASE("error codes") {
    Cluster c(one_node());
    testing::write_text(c.data_dir(0) / "t.csv", "x,s\n1,a\n");
    auto conn = anon(c);
    CHECK(error_code_of([&] { conn.get(c.uri(0, "missing.csv")); }) == ErrorCode::NotFound);
    CHECK(error_code_of([&] { conn.get("dacp://" + c.endpoint(0).to_string() + "/nope/t.csv"); }) ==
          ErrorCode::NotFound);
    CHECK(error_code_of([&] { conn.get(c.uri(0, "../t.csv")); }) == ErrorCode::Forbidden);
    CHECK(error_code_of([&] { conn.get(c.uri(0, "t.csv"), std::nullopt, std::string("s > 3")); }) ==
          ErrorCode::TypeError);
    CHECK(error_code_of([&] { conn.get(c.uri(0, "t.csv"), std::vector<std::string>{"zz"}); }) ==
          ErrorCode::TypeError);
    CHECK(error_code_of([&] { conn.get(c.uri(0, "t.csv"), std::nullopt, std::string("x >")); }) ==
          ErrorCode::BadRequest);
    // The connection survives request errors.
    CHECK(conn.get(c.uri(0, "t.csv")).collect_rows().size() == 1);
  }

  TEST_CASE("authenticated datasets reject anonymous principals") {
    testing::TempDir dir;
    testing::write_text(dir / "secret" / "t.csv", "x\n1\n");
    testing::write_text(dir / "open" / "t.csv", "x\n2\n");
    datasource::DatasetRegistry reg;
    reg.add({"secret", dir / "secret", "", datasource::Access::Authenticated, false});
    reg.add({"open", dir / "open", "", datasource::Access::Public, false});
    server::UserStore users;
    users.add("alice", crypto::hash_password("pw", true));
    server::ServerConfig cfg;
    cfg.listen = "127.0.0.1:0";
    server::Server srv(cfg, std::move(reg), std::move(users));
    srv.start();
    const std::string base = "dacp://" + srv.endpoint().to_string();
    auto anon_conn = client::Connection::connect(srv.endpoint(), client::Credentials::anonymous());
    CHECK(anon_conn.get(base + "/open/t.csv").collect_rows().size() == 1);
    CHECK(error_code_of([&] { anon_conn.get(base + "/secret/t.csv"); }) == ErrorCode::Forbidden);
    auto alice = client::Connection::connect(srv.endpoint(), client::Credentials::basic("alice", "pw"));
    CHECK(alice.get(base + "/secret/t.csv").collect_rows().size() == 1);
  }

  TEST_CASE("tokens: expired session token is TOKEN_EXPIRED, stream tokens are not session tokens") {
    auto clock = std::make_shared<ManualClock>(1'000'000);
    auto opts = one_node();
    opts.server.clock = clock;
    opts.token_ttl_seconds = 100;
    Cluster c(opts);
    testing::write_text(c.data_dir(0) / "t.csv", "x\n1\n");
    RawClient raw(c.endpoint(0));
    const auto token = raw.handshake();
    clock->advance(100);
    raw.send(wire::Get{token, c.uri(0, "t.csv"), std::nullopt, std::nullopt, 4});
    CHECK(expect<wire::ErrorMsg>(raw.recv()).code == ErrorCode::TokenExpired);

    raw.send(wire::Auth{});
    const auto fresh = expect<wire::AuthOk>(raw.recv()).token;
    raw.send(wire::Get{fresh, c.uri(0, "t.csv"), std::nullopt, std::nullopt, 4});
    CHECK(read_stream(raw).rows == 1);

    dag::DagTask task = dag::parse_dag(R"({"nodes":[{"id":"g","kind":"source.get","uri":")" + c.uri(0, "t.csv") +
                                       R"(","inputs":[]}],"sink":"g"})");
    raw.send(wire::CookPublish{fresh, dag::to_json(task), 60});
    const auto pub = expect<wire::PublishOk>(raw.recv());
    raw.send(wire::Get{pub.stream_token, c.uri(0, "t.csv"), std::nullopt, std::nullopt, 4});
    CHECK(expect<wire::ErrorMsg>(raw.recv()).code == ErrorCode::Forbidden);
  }
}

TEST_SUITE("flow control") {
  TEST_CASE("with credit c and no CREDIT the server sends exactly c batches, then stalls") {
    auto opts = one_node();
    opts.server.source_override = [](const Uri& u) -> std::optional<StreamingDataFrame> {
      if (u.path == "ten") return testing::paced_stream(10, 0ms);
      return std::nullopt;
    };
    Cluster c(opts);
    for (std::uint32_t credit : {1u, 2u, 3u, 12u}) {
      RawClient raw(c.endpoint(0));
      const auto token = raw.handshake();
      raw.send(wire::Get{token, c.uri(0, "ten"), std::nullopt, std::nullopt, credit});
      expect<wire::SchemaMsg>(raw.recv());
      const std::size_t expected = std::min<std::size_t>(credit, 10);
      for (std::size_t i = 0; i < expected; ++i) expect<wire::BatchMsg>(raw.recv());
      if (credit >= 10) {
        CHECK(expect<wire::EndStream>(raw.recv()).total_rows == 10);
        continue;
      }
      CHECK_FALSE(raw.poll(300ms).has_value());
      raw.send(wire::Credit{100});
      for (std::size_t i = expected; i < 10; ++i) expect<wire::BatchMsg>(raw.recv());
      CHECK(expect<wire::EndStream>(raw.recv()).total_rows == 10);
    }
  }

  TEST_CASE("credit 0 is treated as 4") {
    auto opts = one_node();
    opts.server.source_override = [](const Uri&) -> std::optional<StreamingDataFrame> {
      return testing::paced_stream(10, 0ms);
    };
    Cluster c(opts);
    RawClient raw(c.endpoint(0));
    const auto token = raw.handshake();
    raw.send(wire::Get{token, c.uri(0, "x"), std::nullopt, std::nullopt, 0});
    expect<wire::SchemaMsg>(raw.recv());
    for (int i = 0; i < 4; ++i) expect<wire::BatchMsg>(raw.recv());
    CHECK_FALSE(raw.poll(300ms).has_value());
  }

  TEST_CASE("the client never holds more than window + 1 undelivered batches") {
    auto opts = one_node();
    opts.server.source_override = [](const Uri&) -> std::optional<StreamingDataFrame> {
      return testing::paced_stream(40, 0ms);
    };
    Cluster c(opts);
    for (std::uint32_t window : {1u, 2u, 4u, 7u}) {
      client::ClientOptions co;
      co.window = window;
      auto conn = anon(c, 0, co);
      c.node(0).traffic().reset();
      auto sdf = conn.get(c.uri(0, "x"));
      std::size_t consumed = 0;
      while (auto b = sdf.next_batch()) {
        ++consumed;
        std::this_thread::sleep_for(2ms);
        const auto sent = c.node(0).traffic().frames_out(wire::MsgType::Batch);
        CHECK(sent <= consumed + window + 1);
      }
      CHECK(consumed == 40);
    }
  }
}

TEST_SUITE("put") {
  TEST_CASE("PUT then GET returns identical rows") {
    Cluster c(one_node());
    auto conn = anon(c);
    auto schema = make_schema({{"id", DataType::Int64, false}, {"name", DataType::Utf8, true}});
    std::vector<Row> rows;
    for (int i = 0; i < 100; ++i) {
      rows.push_back({std::int64_t{i}, i % 7 == 0 ? Value{} : Value{std::string(i % 5 ? "n" : "")}});
    }
    CHECK(conn.put(c.uri(0, "up/t.csv"), StreamingDataFrame::from_rows(schema, rows, 13)) == 100);
    auto back = conn.get(c.uri(0, "up/t.csv"));
    CHECK(back.schema() == *schema);
    auto got = back.collect_rows();
    REQUIRE(got.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) CHECK(same_row(got[i], rows[i]));
  }

  TEST_CASE("random tables of every type round-trip value-exactly") {
    Cluster c(one_node());
    auto conn = anon(c);
    testing::Rng rng(7);
    auto schema = testing::random_table_schema();
    for (int trial = 0; trial < 10; ++trial) {
      auto rows = testing::random_table_rows(rng, testing::uniform(rng, 0, 2000));
      const auto uri = c.uri(0, "r" + std::to_string(trial) + ".csv");
      CHECK(conn.put(uri, StreamingDataFrame::from_rows(schema, rows, 300)) == rows.size());
      auto got = conn.get(uri).collect_rows();
      REQUIRE(got.size() == rows.size());
      for (std::size_t i = 0; i < rows.size(); ++i) {
        INFO("row ", i);
        CHECK(same_row(got[i], rows[i]));
        if (!same_row(got[i], rows[i])) break;
      }
    }
  }

  TEST_CASE("binary uploads persist the chunk bytes") {
    Cluster c(one_node());
    auto conn = anon(c);
    std::string content(300'000, '\0');
    std::mt19937 gen(3);
    for (auto& ch : content) ch = static_cast<char>(gen());
    testing::write_text(c.data_dir(0) / "src.bin", content);
    auto reader = anon(c);
    CHECK(conn.put(c.uri(0, "copy.bin"), reader.get(c.uri(0, "src.bin"))) == 1);
    CHECK(testing::read_file(c.data_dir(0) / "copy.bin") == content);
  }

  TEST_CASE("a batch that breaks the declared schema fails with TYPE_ERROR and leaves no file") {
    Cluster c(one_node());
    RawClient raw(c.endpoint(0));
    const auto token = raw.handshake();
    auto declared = make_schema({{"x", DataType::Int64, false}});
    auto other = make_schema({{"x", DataType::Utf8, false}});
    auto good = StreamingDataFrame::from_rows(declared, {{std::int64_t{1}}}).collect_batches().at(0);
    auto bad = StreamingDataFrame::from_rows(other, {{std::string("a long string value")}}).collect_batches().at(0);
    raw.send(wire::PutBegin{token, c.uri(0, "p.csv"), declared});
    raw.send(wire::BatchMsg{wire::encode_batch(good)});
    raw.send(wire::BatchMsg{wire::encode_batch(bad)});
    raw.send(wire::BatchMsg{wire::encode_batch(good)});
    raw.send(wire::EndStream{3});
    CHECK(expect<wire::ErrorMsg>(raw.recv()).code == ErrorCode::TypeError);
    CHECK(fs::is_empty(c.data_dir(0)));
    // Back in the ready state afterwards.
    raw.send(wire::Get{token, c.uri(0, ""), std::nullopt, std::nullopt, 4});
    CHECK(read_stream(raw).rows == 0);
  }

  TEST_CASE("client PUT error keeps the connection usable") {
    Cluster c(one_node());
    auto conn = anon(c);
    auto schema = make_schema({{"x", DataType::Int64, false}});
    CHECK(error_code_of([&] {
            conn.put(c.uri(0, "bad.txt"), StreamingDataFrame::from_rows(schema, {{std::int64_t{1}}}));
          }) == ErrorCode::BadRequest);
    CHECK(conn.put(c.uri(0, "ok.csv"), StreamingDataFrame::from_rows(schema, {{std::int64_t{1}}})) == 1);
  }

  TEST_CASE("empty upload writes a header-only file") {
    Cluster c(one_node());
    auto conn = anon(c);
    auto schema = make_schema({{"a", DataType::Int64, false}, {"b", DataType::Utf8, true}});
    CHECK(conn.put(c.uri(0, "e.csv"), StreamingDataFrame::from_rows(schema, {})) == 0);
    CHECK(testing::read_file(c.data_dir(0) / "e.csv") == "a,b\r\n");
    auto back = conn.get(c.uri(0, "e.csv"));
    CHECK(back.schema() == *schema);
    CHECK(back.collect_rows().empty());
  }

  TEST_CASE("read-only datasets refuse uploads") {
    auto opts = one_node();
    opts.writable = false;
    Cluster c(opts);
    auto conn = anon(c);
    auto schema = make_schema({{"x", DataType::Int64, false}});
    CHECK(error_code_of([&] {
            conn.put(c.uri(0, "t.csv"), StreamingDataFrame::from_rows(schema, {{std::int64_t{1}}}));
          }) == ErrorCode::Forbidden);
    CHECK(fs::is_empty(c.data_dir(0)));
  }
}

TEST_SUITE("cook") {
  TEST_CASE("get -> filter -> select matches the reference interpreter") {
    Cluster c(one_node());
    testing::Rng rng(11);
    auto schema = testing::random_table_schema();
    auto rows = testing::random_table_rows(rng, 800);
    auto conn = anon(c);
    const auto uri = c.uri(0, "rt.csv");
    conn.put(uri, StreamingDataFrame::from_rows(schema, rows));
    testing::Oracle oracle({{uri, testing::Table::of(*schema, rows)}});
    for (int i = 0; i < 30; ++i) {
      testing::RandomTaskBuilder builder(rng, {uri}, schema);
      dag::DagTask task = builder.build();
      std::vector<Row> got;
      std::optional<ErrorCode> err;
      try {
        got = conn.cook(task).collect_rows();
      } catch (const Error& e) {
        err = e.code();
      }
      if (err) {
        CHECK(*err != ErrorCode::Internal);
        continue;
      }
      auto expected = oracle.run(task);
      REQUIRE(got.size() == expected.rows.size());
      for (std::size_t r = 0; r < got.size(); ++r) CHECK(same_row(got[r], expected.rows[r]));
    }
  }

  TEST_CASE("cyclic and malformed documents are BAD_REQUEST") {
    Cluster c(one_node());
    auto conn = anon(c);
    const std::string cyclic = R"({"nodes":[
      {"id":"a","kind":"op.limit","n":1,"inputs":["b"]},
      {"id":"b","kind":"op.limit","n":1,"inputs":["a"]}],"sink":"a"})";
    CHECK(error_code_of([&] { conn.cook(cyclic); }) == ErrorCode::BadRequest);
    CHECK(error_code_of([&] { conn.cook("{not json"); }) == ErrorCode::BadRequest);
  }

  TEST_CASE("union streams left rows then right rows") {
    Cluster c(one_node());
    testing::write_text(c.data_dir(0) / "l.csv", "x\n1\n2\n");
    testing::write_text(c.data_dir(0) / "r.csv", "x\n3\n4\n");
    auto conn = anon(c);
    auto rows = conn.frame(c.uri(0, "l.csv")).union_with(conn.frame(c.uri(0, "r.csv"))).collect().collect_rows();
    CHECK(int_column(rows, 0) == std::vector<std::int64_t>{1, 2, 3, 4});
  }

  TEST_CASE("sources on other servers are rejected; type errors name the node") {
    Cluster c(one_node());
    testing::write_text(c.data_dir(0) / "t.csv", "x\n1\n");
    auto conn = anon(c);
    const std::string elsewhere = R"({"nodes":[{"id":"g","kind":"source.get",
      "uri":"dacp://127.0.0.1:1/data/t.csv","inputs":[]}],"sink":"g"})";
    CHECK(error_code_of([&] { conn.cook(elsewhere); }) == ErrorCode::BadRequest);
    try {
      conn.frame(c.uri(0, "t.csv")).map("y", "x + nope").collect();
      FAIL("expected a type error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::TypeError);
      CHECK(std::string(e.what()).find("map_") != std::string::npos);
    }
  }
}

TEST_SUITE("publish and pull") {
  dag::DagTask filtered_task(const std::string& uri, const std::string& pred) {
    return dag::parse_dag(R"({"nodes":[{"id":"g","kind":"source.get","uri":")" + uri +
                          R"(","inputs":[]},{"id":"f","kind":"op.filter","predicate":")" + pred +
                          R"(","inputs":["g"]}],"sink":"f"})");
  }

  TEST_CASE("publish is lazy; PULL streams the result once") {
    Cluster c(one_node());
    testing::write_text(c.data_dir(0) / "n.csv", testing::numbered_csv(10'000, 10));
    auto conn = anon(c);
    c.reset_counters();
    auto pub = conn.publish(filtered_task(c.uri(0, "n.csv"), "x = 3"), 60);
    CHECK(pub.stream_id.size() == 32);
    CHECK(pub.schema->size() == 3);
    CHECK(c.node(0).source_stats().batches_produced == 0);
    CHECK(c.node(0).live_published() == 1);

    auto rows = client::pull_stream(c.endpoint(0), pub.stream_id, pub.stream_token, pub.schema).collect_rows();
    CHECK(rows.size() == 1000);
    CHECK(c.node(0).source_stats().batches_produced > 0);

    CHECK(error_code_of([&] {
            client::pull_stream(c.endpoint(0), pub.stream_id, pub.stream_token).collect_rows();
          }) == ErrorCode::NotFound);
  }

  TEST_CASE("PULL rejections: session token, tampered token, unknown id") {
    Cluster c(one_node());
    testing::write_text(c.data_dir(0) / "t.csv", "x\n1\n");
    auto conn = anon(c);
    auto pub = conn.publish(filtered_task(c.uri(0, "t.csv"), "x > 0"), 60);

    RawClient raw(c.endpoint(0));
    const auto session = raw.handshake();
    raw.send(wire::Pull{pub.stream_id, session, 4});
    CHECK(expect<wire::ErrorMsg>(raw.recv()).code == ErrorCode::Forbidden);

    std::string tampered = pub.stream_token;
    tampered[5] = tampered[5] == 'A' ? 'B' : 'A';
    raw.send(wire::Pull{pub.stream_id, tampered, 4});
    CHECK(expect<wire::ErrorMsg>(raw.recv()).code == ErrorCode::Forbidden);

    raw.send(wire::Pull{std::string(32, '0'), pub.stream_token, 4});
    CHECK(expect<wire::ErrorMsg>(raw.recv()).code == ErrorCode::NotFound);

    // Failed attempts do not consume the stream.
    raw.send(wire::Pull{pub.stream_id, pub.stream_token, 4});
    CHECK(read_stream(raw).rows == 1);
    CHECK(raw.counters().frames_in(wire::MsgType::Batch) == 1);
  }

  TEST_CASE("unpulled streams are reaped after their ttl; later PULL is TOKEN_EXPIRED") {
    auto clock = std::make_shared<ManualClock>(5'000'000);
    auto opts = one_node();
    opts.server.clock = clock;
    Cluster c(opts);
    testing::write_text(c.data_dir(0) / "t.csv", "x\n1\n");
    client::ClientOptions co;
    co.clock = clock;
    auto conn = anon(c, 0, co);
    auto pub = conn.publish(filtered_task(c.uri(0, "t.csv"), "x > 0"), 5);
    CHECK(pub.expiry == 5'000'005);
    clock->advance(6);
    c.node(0).sweep_now();
    CHECK(c.node(0).live_published() == 0);
    CHECK(error_code_of([&] {
            client::pull_stream(c.endpoint(0), pub.stream_id, pub.stream_token, nullptr, co).collect_rows();
          }) == ErrorCode::TokenExpired);
  }

  TEST_CASE("expired but not yet reaped streams are TOKEN_EXPIRED too") {
    auto clock = std::make_shared<ManualClock>(5'000'000);
    auto opts = one_node();
    opts.server.clock = clock;
    Cluster c(opts);
    testing::write_text(c.data_dir(0) / "t.csv", "x\n1\n");
    client::ClientOptions co;
    co.clock = clock;
    auto conn = anon(c, 0, co);
    auto pub = conn.publish(filtered_task(c.uri(0, "t.csv"), "x > 0"), 5);
    clock->advance(5);
    CHECK(error_code_of([&] {
            client::pull_stream(c.endpoint(0), pub.stream_id, pub.stream_token, nullptr, co).collect_rows();
          }) == ErrorCode::TokenExpired);
  }

  TEST_CASE("ttl must be within [1, 3600]") {
    Cluster c(one_node());
    testing::write_text(c.data_dir(0) / "t.csv", "x\n1\n");
    auto conn = anon(c);
    auto task = filtered_task(c.uri(0, "t.csv"), "x > 0");
    CHECK(error_code_of([&] { conn.publish(task, 0); }) == ErrorCode::BadRequest);
    CHECK(error_code_of([&] { conn.publish(task, 3601); }) == ErrorCode::BadRequest);
    CHECK_NOTHROW(conn.publish(task, 3600));
  }
}

TEST_SUITE("client") {
  TEST_CASE("a token close to expiry triggers exactly one re-AUTH") {
    auto clock = std::make_shared<ManualClock>(1'000'000);
    auto opts = one_node();
    opts.server.clock = clock;
    Cluster c(opts);
    testing::write_text(c.data_dir(0) / "t.csv", "x\n1\n");
    client::ClientOptions co;
    co.clock = clock;
    auto conn = anon(c, 0, co);
    const auto first_expiry = conn.token_expiry();
    conn.get(c.uri(0, "t.csv")).collect_rows();
    CHECK(conn.auth_count() == 1);
    clock->advance(3600 - 61);
    conn.get(c.uri(0, "t.csv")).collect_rows();
    CHECK(conn.auth_count() == 1);
    clock->advance(2);
    conn.get(c.uri(0, "t.csv")).collect_rows();
    CHECK(conn.auth_count() == 2);
    CHECK(conn.token_expiry() > first_expiry);
    conn.get(c.uri(0, "t.csv")).collect_rows();
    CHECK(conn.auth_count() == 2);
  }

  TEST_CASE("the first row of a paced stream arrives long before the stream ends") {
    auto produced = std::make_shared<std::atomic<std::size_t>>(0);
    auto opts = one_node();
    opts.server.source_override = [produced](const Uri&) -> std::optional<StreamingDataFrame> {
      return testing::paced_stream(100, 10ms, produced);
    };
    Cluster c(opts);
    auto conn = anon(c);
    const auto start = std::chrono::steady_clock::now();
    auto sdf = conn.get(c.uri(0, "paced"));
    auto first = sdf.next_row();
    const auto elapsed = std::chrono::steady_clock::now() - start;
    REQUIRE(first);
    CHECK(elapsed < 500ms);
    CHECK(produced->load() < 100);
    std::size_t n = 1;
    while (sdf.next_row()) ++n;
    CHECK(n == 100);
  }

  TEST_CASE("abandoning a stream closes the connection; later calls fail locally") {
    Cluster c(one_node());
    testing::write_text(c.data_dir(0) / "n.csv", testing::numbered_csv(50'000));
    auto conn = anon(c);
    {
      auto sdf = conn.get(c.uri(0, "n.csv"));
      CHECK(sdf.next_batch().has_value());
    }
    CHECK_FALSE(conn.is_open());
    const auto before = c.node(0).traffic().frames_in(wire::MsgType::Get);
    CHECK_THROWS_AS(conn.get(c.uri(0, "n.csv")), TransportError);
    CHECK(c.node(0).traffic().frames_in(wire::MsgType::Get) == before);
    CHECK(anon(c).get(c.uri(0, "n.csv")).collect_rows().size() == 50'000);
  }

  TEST_CASE("one stream at a time per connection") {
    Cluster c(one_node());
    testing::write_text(c.data_dir(0) / "n.csv", testing::numbered_csv(50'000));
    auto conn = anon(c);
    auto a = conn.get(c.uri(0, "n.csv"));
    CHECK(error_code_of([&] { conn.get(c.uri(0, "n.csv")); }) == ErrorCode::BadRequest);
    CHECK(a.collect_rows().size() == 50'000);
    CHECK(conn.get(c.uri(0, "n.csv")).collect_rows().size() == 50'000);
  }

  TEST_CASE("frame builder") {
    Cluster c(one_node());
    testing::write_text(c.data_dir(0) / "a.csv", "x\n1\n2\n");
    testing::write_text(c.data_dir(0) / "b.csv", "x\n5\n");
    testing::write_text(c.data_dir(0) / "c.bin", "zz");
    testing::write_text(c.data_dir(0) / "sub" / "d.csv", "x\n1\n");
    auto conn = anon(c);

    SUBCASE("empty chain equals GET") {
      auto a = conn.frame(c.uri(0, "a.csv")).collect().collect_rows();
      auto b = conn.get(c.uri(0, "a.csv")).collect_rows();
      REQUIRE(a.size() == b.size());
      for (std::size_t i = 0; i < a.size(); ++i) CHECK(same_row(a[i], b[i]));
    }
    SUBCASE("filter format = 'csv' over a directory") {
      auto rows = conn.frame(c.uri(0, "")).filter("format = 'csv'").collect().collect_rows();
      REQUIRE(rows.size() == 2);
      CHECK(std::get<std::string>(rows[0][0]) == "a.csv");
      CHECK(std::get<std::string>(rows[1][0]) == "b.csv");
    }
    SUBCASE("built documents re-parse to the same task") {
      auto f = conn.frame(c.uri(0, "a.csv"))
                   .filter("x > 1 and not (x = 7)")
                   .map("y", "x * 2 - -3")
                   .select({"y", "x"})
                   .limit(5)
                   .union_with(conn.frame(c.uri(0, "b.csv")).map("y", "x * 1").select({"y", "x"}));
      CHECK(dag::parse_dag(dag::to_json(f.task())) == f.task());
      auto rows = f.collect().collect_rows();
      REQUIRE(rows.size() == 2);
      CHECK(std::get<std::int64_t>(rows[0][0]) == 7);
      CHECK(std::get<std::int64_t>(rows[1][0]) == 5);
    }
    SUBCASE("syntax errors surface at the call") {
      CHECK_THROWS_AS(conn.frame(c.uri(0, "a.csv")).filter("x >"), Error);
      CHECK_THROWS_AS(conn.frame(c.uri(0, "a.csv")).map("y", "x +"), Error);
    }
  }

  TEST_CASE("blob drill-down returns the same frame as a direct GET") {
    Cluster c(one_node());
    testing::write_text(c.data_dir(0) / "a.csv", "x,y\n1,a\n2,b\n");
    auto conn = anon(c);
    auto listing = conn.get(c.uri(0, "")).collect_rows();
    REQUIRE(listing.size() == 1);
    const auto blob = std::get<BlobRef>(listing[0][5]);
    CHECK(blob.size_bytes == 12);
    auto a = conn.expand(blob).collect_rows();
    auto b = conn.get(c.uri(0, "a.csv")).collect_rows();
    REQUIRE(a.size() == 2);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(same_row(a[i], b[i]));
  }
}
