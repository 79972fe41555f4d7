// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cstdlib>
#include <sstream>

#include "cli.hpp"
#include "dacp/client/connection.hpp"
#include "dacp/federation/harness.hpp"
#include "support/fixtures.hpp"
#include "support/temp_dir.hpp"

using namespace dacp;
using dacp::federation::Cluster;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result dacp_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

Cluster::Options nodes(std::size_t n) {
  Cluster::Options o;
  o.nodes = n;
  return o;
}

}  // namespace

TEST_CASE("ls of an empty dataset root is a header-only table") {
  Cluster c(nodes(1));
  auto r = dacp_cli({"ls", c.uri(0, "")});
  CHECK(r.code == cli::kExitOk);
  CHECK(r.out.find("name") != std::string::npos);
  CHECK(r.out.find("content") == std::string::npos);
  CHECK(r.out.find("(0 rows)") != std::string::npos);
}

TEST_CASE("ls lists children without the content column") {
  Cluster c(nodes(1));
  testing::write_text(c.data_dir(0) / "a.csv", "x\n1\n");
  auto r = dacp_cli({"ls", c.uri(0, ""), "--output", "csv"});
  CHECK(r.code == 0);
  CHECK(r.out.rfind("name,path,format,size_bytes,modified_unix\r\n", 0) == 0);
  CHECK(r.out.find("a.csv,a.csv,csv,4,") != std::string::npos);
}

TEST_CASE("get with a predicate writes filtered csv") {
  Cluster c(nodes(1));
  testing::write_text(c.data_dir(0) / "t.csv", "x,y\n1,a\n5,b\n3,c\n9,d\n");
  auto r = dacp_cli({"get", c.uri(0, "t.csv"), "--where", "x > 3", "--output", "csv"});
  CHECK(r.code == 0);
  CHECK(r.out == "x,y\r\n5,b\r\n9,d\r\n");

  auto cols = dacp_cli({"get", c.uri(0, "t.csv"), "--columns", "y", "--output", "jsonl"});
  CHECK(cols.out == "{\"y\":\"a\"}\n{\"y\":\"b\"}\n{\"y\":\"c\"}\n{\"y\":\"d\"}\n");

  testing::TempDir tmp;
  auto file = (tmp / "o.csv").string();
  CHECK(dacp_cli({"get", c.uri(0, "t.csv"), "-o", file}).code == 0);
  CHECK(testing::read_file(file) == "x,y\r\n1,a\r\n5,b\r\n3,c\r\n9,d\r\n");
}

TEST_CASE("protocol errors exit 1 with the server code") {
  Cluster c(nodes(1));
  auto missing = dacp_cli({"get", c.uri(0, "nope.csv")});
  CHECK(missing.code == cli::kExitProtocol);
  CHECK(missing.err.find("NOT_FOUND (2)") != std::string::npos);

  testing::TempDir tmp;
  auto bad = tmp.write("bad.json", "{\"nodes\": [{\"id\": \"g\", \"kind\": \"source.get\", \"uri\": \"" + c.uri(0, "t.csv") +
                                       "\", \"inputs\": [\"g\"]}], \"sink\": \"g\"}");
  auto r = dacp_cli({"cook", "--dag", bad.string()});
  CHECK(r.code == cli::kExitProtocol);
  CHECK(r.err.find("BAD_REQUEST (4)") != std::string::npos);

  auto odd_target = dacp_cli({"put", c.uri(0, "x.txt"), bad.string()});
  CHECK(odd_target.code == cli::kExitProtocol);
  CHECK(odd_target.err.find("BAD_REQUEST (4)") != std::string::npos);
}

TEST_CASE("usage errors exit 2") {
  CHECK(dacp_cli({}).code == cli::kExitUsage);
  CHECK(dacp_cli({"get"}).code == cli::kExitUsage);
  CHECK(dacp_cli({"get", "http://x/y"}).code == cli::kExitUsage);
  CHECK(dacp_cli({"get", "dacp://127.0.0.1:1/d/x", "--output", "xml"}).code == cli::kExitUsage);
  CHECK(dacp_cli({"frobnicate"}).code == cli::kExitUsage);
  CHECK(dacp_cli({"cook"}).code == cli::kExitUsage);
  CHECK(dacp_cli({"--help"}).code == cli::kExitOk);
}

TEST_CASE("put then get with basic credentials and with DACP_TOKEN") {
  auto o = nodes(1);
  o.users = {{"ann", "pw"}};
  o.access = datasource::Access::Authenticated;
  Cluster c(o);
  testing::TempDir tmp;
  auto local = tmp.write("in.csv", "k,v\r\n1,x y\r\n2,\"q,\"\"r\"\r\n");
  auto put = dacp_cli({"--user", "ann", "--password", "pw", "put", c.uri(0, "up.csv"), local.string()});
  CHECK(put.code == 0);
  CHECK(put.out.find("2 rows written") != std::string::npos);

  CHECK(dacp_cli({"get", c.uri(0, "up.csv")}).code == cli::kExitProtocol);

  auto conn = client::Connection::connect(c.endpoint(0), client::Credentials::basic("ann", "pw"));
  ::setenv("DACP_TOKEN", conn.token().c_str(), 1);
  auto got = dacp_cli({"get", c.uri(0, "up.csv")});
  ::unsetenv("DACP_TOKEN");
  CHECK(got.code == 0);
  CHECK(got.out == testing::read_file(local));
}

TEST_CASE("cook across two servers coordinates locally") {
  Cluster c(nodes(2));
  testing::write_text(c.data_dir(0) / "a.csv", "v\n1\n2\n3\n");
  testing::write_text(c.data_dir(1) / "b.csv", "v\n10\n20\n30\n");
  testing::TempDir tmp;
  auto dag = tmp.write("u.json", R"({"nodes": [
    {"id": "a", "kind": "source.get", "uri": ")" + c.uri(0, "a.csv") + R"(", "inputs": []},
    {"id": "b", "kind": "source.get", "uri": ")" + c.uri(1, "b.csv") + R"(", "inputs": []},
    {"id": "fb", "kind": "op.filter", "predicate": "v > 10", "inputs": ["b"]},
    {"id": "u", "kind": "op.union", "inputs": ["a", "fb"]}], "sink": "u"})");
  auto r = dacp_cli({"cook", "--dag", dag.string()});
  CHECK(r.code == 0);
  CHECK(r.out == "v\r\n1\r\n2\r\n3\r\n20\r\n30\r\n");

  // sent whole to one server instead, the locality check refuses it
  auto single = dacp_cli({"cook", "--dag", dag.string(), "--server", c.endpoint(0).to_string()});
  CHECK(single.code == cli::kExitProtocol);
  CHECK(single.err.find("BAD_REQUEST") != std::string::npos);
}

TEST_CASE("bench reports both paths") {
  Cluster c(nodes(1));
  testing::write_text(c.data_dir(0) / "t.csv", testing::numbered_csv(500));
  auto r = dacp_cli({"bench", c.uri(0, ""), "--baseline-dir", c.data_dir(0).string()});
  CHECK(r.code == 0);
  CHECK(r.out.find("t.csv") != std::string::npos);
  CHECK(r.out.find("baseline") != std::string::npos);
  CHECK(r.out.find("MB/s") != std::string::npos);
}
