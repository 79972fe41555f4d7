// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <atomic>
#include <cmath>
#include <limits>

#include "dacp/dag/engine.hpp"
#include "dacp/dag/planner.hpp"
#include "dacp/error.hpp"
#include "support/oracle.hpp"
#include "support/random_dag.hpp"

using namespace dacp;
using namespace dacp::dag;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::Internal;
}

struct MemorySource {
  SchemaPtr schema;
  std::vector<Row> rows;
  std::size_t batch_rows = 64;
};

/// Opener over in-memory tables, counting produced batches per uri.
struct MemoryContext {
  std::map<std::string, MemorySource> tables;
  std::shared_ptr<std::atomic<int>> produced = std::make_shared<std::atomic<int>>(0);

  ExecContext context() {
    ExecContext ctx;
    ctx.open_source = [this](const DagNode& n) {
      const MemorySource& src = tables.at(n.uri);
      auto counter = produced;
      auto rows = std::make_shared<std::vector<Row>>(src.rows);
      std::size_t pos = 0;
      const std::size_t step = src.batch_rows;
      SchemaPtr schema = src.schema;
      return StreamingDataFrame::from_function(schema, [=]() mutable -> std::optional<RecordBatch> {
        if (pos >= rows->size()) return std::nullopt;
        const std::size_t end = std::min(rows->size(), pos + step);
        std::vector<Row> chunk(rows->begin() + static_cast<std::ptrdiff_t>(pos),
                               rows->begin() + static_cast<std::ptrdiff_t>(end));
        pos = end;
        ++*counter;
        return RecordBatch::from_rows(schema, chunk);
      });
    };
    return ctx;
  }
};

SchemaPtr int_schema(const char* name = "x") { return make_schema({{name, DataType::Int64, true}}); }

std::vector<Row> int_rows(std::int64_t from, std::int64_t to) {
  std::vector<Row> rows;
  for (std::int64_t v = from; v <= to; ++v) rows.push_back({Value{v}});
  return rows;
}

void check_same_rows(const std::vector<Row>& got, const std::vector<Row>& want) {
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    INFO("row " << i);
    CHECK(same_row(got[i], want[i]));
  }
}

const char* kChain = R"({"nodes":[
  {"id":"g","kind":"source.get","uri":"dacp://h:1/d/t.csv","inputs":[]},
  {"id":"f","kind":"op.filter","predicate":"x > 3","inputs":["g"]},
  {"id":"s","kind":"op.select","columns":["x"],"inputs":["f"]}],"sink":"s"})";

}  // namespace

TEST_CASE("parse_dag maps a get-filter-select chain") {
  DagTask t = parse_dag(kChain);
  CHECK(t.nodes.size() == 3);
  CHECK(t.sink == "s");
  CHECK(t.at("f").kind == NodeKind::Filter);
  CHECK(t.at("s").columns == std::vector<std::string>{"x"});
  CHECK(parse_dag(to_json(t)) == t);
}

TEST_CASE("parse_dag rejects structural errors") {
  auto bad = [](const char* doc) { return code_of([&] { parse_dag(doc); }); };
  // Two nodes feeding each other.
  CHECK(bad(R"({"nodes":[{"id":"a","kind":"op.limit","n":1,"inputs":["b"]},
                         {"id":"b","kind":"op.limit","n":1,"inputs":["a"]}],"sink":"a"})") == ErrorCode::BadRequest);
  // Union with one input.
  CHECK(bad(R"({"nodes":[{"id":"g","kind":"source.get","uri":"dacp://h:1/d/x","inputs":[]},
                         {"id":"u","kind":"op.union","inputs":["g"]}],"sink":"u"})") == ErrorCode::BadRequest);
  CHECK(bad(R"({"nodes":[{"id":"g","kind":"source.get","uri":"dacp://h:1/d/x","inputs":[]},
                         {"id":"g","kind":"op.limit","n":1,"inputs":["g"]}],"sink":"g"})") == ErrorCode::BadRequest);
  CHECK(bad(R"({"nodes":[{"id":"g","kind":"source.teleport","inputs":[]}],"sink":"g"})") == ErrorCode::BadRequest);
  CHECK(bad(R"({"nodes":[{"id":"g","kind":"source.get","uri":"dacp://h:1/d/x","inputs":[]}]})") == ErrorCode::BadRequest);
  CHECK(bad(R"({"nodes":[{"id":"g","kind":"source.get","uri":"dacp://h:1/d/x","inputs":[]}],"sink":"zz"})") ==
        ErrorCode::BadRequest);
  CHECK(bad(R"({"nodes":[{"id":"g","kind":"source.get","uri":"dacp://h:1/d/x","inputs":[]},
                         {"id":"h","kind":"source.get","uri":"dacp://h:1/d/y","inputs":[]}],"sink":"g"})") ==
        ErrorCode::BadRequest);
  // Fan-out: one node feeding both sides of a union.
  CHECK(bad(R"({"nodes":[{"id":"g","kind":"source.get","uri":"dacp://h:1/d/x","inputs":[]},
                         {"id":"u","kind":"op.union","inputs":["g","g"]}],"sink":"u"})") == ErrorCode::BadRequest);
  CHECK(bad(R"({"nodes":[{"id":"g","kind":"source.get","uri":"http://h/d/x","inputs":[]}],"sink":"g"})") ==
        ErrorCode::BadRequest);
  CHECK(bad(R"({"nodes":[{"id":"g","kind":"source.get","uri":"dacp://h:1/d/x","predicate":"x >","inputs":[]}],"sink":"g"})") ==
        ErrorCode::BadRequest);
  CHECK(bad(R"({"nodes":[{"id":"l","kind":"op.limit","n":-1,"inputs":[]}],"sink":"l"})") == ErrorCode::BadRequest);
  CHECK(bad("{not json") == ErrorCode::BadRequest);
  CHECK(bad(R"({"nodes":[{"id":"g","kind":"source.get","uri":"dacp://h:1/d/x","colour":"red","inputs":[]}],"sink":"g"})") ==
        ErrorCode::BadRequest);
}

TEST_CASE("parse_predicate handles the documented forms") {
  auto p = parse_predicate("format = 'csv'");
  REQUIRE(p->kind == Predicate::Kind::Compare);
  CHECK(p->column == "format");
  CHECK(p->op == CmpOp::Eq);
  CHECK(std::get<std::string>(p->literal) == "csv");

  auto q = parse_predicate("NOT (x > 3 AND y = 'a' OR b = true)");
  REQUIRE(q->kind == Predicate::Kind::Not);
  REQUIRE(q->lhs->kind == Predicate::Kind::Or);
  CHECK(q->lhs->lhs->kind == Predicate::Kind::And);
  CHECK(q->lhs->rhs->column == "b");
  CHECK(std::get<bool>(q->lhs->rhs->literal) == true);

  auto r = parse_predicate("name = 'it''s' and n >= -2.5e1 or not flag != FALSE");
  CHECK(to_string(*r) == "name = 'it''s' AND n >= -25.0 OR NOT flag != false");
  CHECK(std::get<std::int64_t>(parse_predicate("v < -9223372036854775808")->literal) ==
        std::numeric_limits<std::int64_t>::min());
  CHECK(parse_predicate("\"odd name\" = 1")->column == "odd name");
}

TEST_CASE("parse_predicate reports the failing byte offset") {
  auto message = [](const char* text) {
    try {
      parse_predicate(text);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::BadRequest);
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message("x = ").find("offset 4") != std::string::npos);
  CHECK(message("x = 1 AND").find("offset 9") != std::string::npos);
  CHECK(message("(x = 1").find("offset 6") != std::string::npos);
  CHECK(message("x ~ 1").find("offset 2") != std::string::npos);
  CHECK(message("x = 'open").find("offset 4") != std::string::npos);
  CHECK(message("x = 99999999999999999999").find("offset 4") != std::string::npos);
  CHECK(message("true = 1").find("offset 0") != std::string::npos);
}

TEST_CASE("random predicates survive print and re-parse") {
  testing::Rng rng(7);
  auto schema = testing::random_table_schema();
  for (int i = 0; i < 1000; ++i) {
    auto p = testing::random_predicate(rng, *schema, 4);
    const std::string text = to_string(*p);
    auto back = parse_predicate(text);
    INFO(text);
    REQUIRE(equal(*p, *back));
    CHECK(to_string(*back) == text);
  }
}

TEST_CASE("random expressions survive print and re-parse") {
  testing::Rng rng(11);
  auto schema = testing::random_table_schema();
  for (int i = 0; i < 1000; ++i) {
    auto e = testing::random_expr(rng, *schema, 4);
    const std::string text = to_string(*e);
    auto back = parse_expr(text);
    INFO(text);
    REQUIRE(equal(*e, *back));
  }
  CHECK(to_string(*Expr::neg(Expr::int_lit(5))) == "-(5)");
  CHECK(to_string(*parse_expr("a - -5 * (b + 1) / -c")) == "a - -5 * (b + 1) / -c");
}

TEST_CASE("infer_schema typing rules") {
  auto abc = make_schema({{"a", DataType::Int64, false}, {"b", DataType::Utf8, true}, {"c", DataType::Float32, true}});
  auto src = [&](const DagNode&) { return abc; };
  auto with = [](const char* body) {
    return parse_dag(std::string(R"({"nodes":[{"id":"g","kind":"source.get","uri":"dacp://h:1/d/t","inputs":[]},)") +
                     body + "]," + R"("sink":"n"})");
  };
  auto sel = infer_schema(with(R"({"id":"n","kind":"op.select","columns":["b","a"],"inputs":["g"]})"), src);
  REQUIRE(sel->size() == 2);
  CHECK(sel->field(0).name == "b");
  CHECK(sel->field(1).name == "a");

  auto xy = make_schema({{"x", DataType::Int64, false}, {"y", DataType::Int64, false}});
  auto map = infer_schema(with(R"({"id":"n","kind":"op.map","new_column":"r","expr":"x / y","inputs":["g"]})"),
                          [&](const DagNode&) { return xy; });
  CHECK(map->field(2) == Field{"r", DataType::Float64, true});
  auto imap = infer_schema(with(R"({"id":"n","kind":"op.map","new_column":"r","expr":"x * 2 - y","inputs":["g"]})"),
                           [&](const DagNode&) { return xy; });
  CHECK(imap->field(2).type == DataType::Int64);

  auto lim = infer_schema(with(R"({"id":"n","kind":"op.limit","n":3,"inputs":["g"]})"), src);
  CHECK(*lim == *abc);

  auto union_doc = parse_dag(R"({"nodes":[
    {"id":"g1","kind":"source.get","uri":"dacp://h:1/d/one","inputs":[]},
    {"id":"g2","kind":"source.get","uri":"dacp://h:1/d/two","inputs":[]},
    {"id":"n","kind":"op.union","inputs":["g1","g2"]}],"sink":"n"})");
  auto a_int = make_schema({{"a", DataType::Int64, true}});
  auto a_float = make_schema({{"a", DataType::Float64, true}});
  CHECK(code_of([&] {
          infer_schema(union_doc, [&](const DagNode& n) { return n.uri.ends_with("one") ? a_int : a_float; });
        }) == ErrorCode::TypeError);

  CHECK(code_of([&] { infer_schema(with(R"({"id":"n","kind":"op.filter","predicate":"zz = 1","inputs":["g"]})"), src); }) ==
        ErrorCode::TypeError);
  CHECK(code_of([&] { infer_schema(with(R"({"id":"n","kind":"op.filter","predicate":"b > 1","inputs":["g"]})"), src); }) ==
        ErrorCode::TypeError);
  CHECK(code_of([&] { infer_schema(with(R"({"id":"n","kind":"op.filter","predicate":"a = 'x'","inputs":["g"]})"), src); }) ==
        ErrorCode::TypeError);
  CHECK(code_of([&] { infer_schema(with(R"({"id":"n","kind":"op.map","new_column":"r","expr":"b + 1","inputs":["g"]})"), src); }) ==
        ErrorCode::TypeError);
  CHECK(code_of([&] { infer_schema(with(R"({"id":"n","kind":"op.select","columns":["q"],"inputs":["g"]})"), src); }) ==
        ErrorCode::TypeError);
}

TEST_CASE("plan pushes a filter into its source") {
  DagTask t = parse_dag(R"({"nodes":[
    {"id":"g","kind":"source.get","uri":"dacp://h:1/d/t","inputs":[]},
    {"id":"f","kind":"op.filter","predicate":"a > 1","inputs":["g"]}],"sink":"f"})");
  DagTask p = plan(t);
  REQUIRE(p.nodes.size() == 1);
  CHECK(p.sink == "g");
  CHECK(to_string(*p.at("g").predicate) == "a > 1");
}

TEST_CASE("plan keeps predicate columns and a residual select") {
  DagTask t = parse_dag(R"({"nodes":[
    {"id":"g","kind":"source.get","uri":"dacp://h:1/d/t","inputs":[]},
    {"id":"f","kind":"op.filter","predicate":"a = 1","inputs":["g"]},
    {"id":"s","kind":"op.select","columns":["b"],"inputs":["f"]}],"sink":"s"})");
  DagTask p = plan(t);
  REQUIRE(p.nodes.size() == 2);
  CHECK(p.sink == "s");
  const DagNode& g = p.at("g");
  CHECK(to_string(*g.predicate) == "a = 1");
  CHECK(*g.projection == std::vector<std::string>{"a", "b"});
  CHECK(p.at("s").inputs == std::vector<std::string>{"g"});
  CHECK(plan(p) == p);
}

TEST_CASE("plan moves a filter below a select and merges both") {
  DagTask t = parse_dag(R"({"nodes":[
    {"id":"g","kind":"source.get","uri":"dacp://h:1/d/t","predicate":"c < 0","inputs":[]},
    {"id":"s","kind":"op.select","columns":["b","a"],"inputs":["g"]},
    {"id":"f","kind":"op.filter","predicate":"a != 2","inputs":["s"]}],"sink":"f"})");
  DagTask p = plan(t);
  CHECK(p.sink == "s");
  CHECK(to_string(*p.at("g").predicate) == "c < 0 AND a != 2");
  CHECK(*p.at("g").projection == std::vector<std::string>{"c", "b", "a"});
}

TEST_CASE("plan leaves filters above maps alone") {
  DagTask t = parse_dag(R"({"nodes":[
    {"id":"g","kind":"source.get","uri":"dacp://h:1/d/t","inputs":[]},
    {"id":"m","kind":"op.map","new_column":"z","expr":"a + 1","inputs":["g"]},
    {"id":"f","kind":"op.filter","predicate":"z > 1","inputs":["m"]}],"sink":"f"})");
  CHECK(plan(t) == t);
}

TEST_CASE("execute filters rows") {
  MemoryContext mem;
  mem.tables["dacp://h:1/d/t"] = {int_schema(), int_rows(1, 6), 4};
  auto out = execute(parse_dag(R"({"nodes":[
    {"id":"g","kind":"source.get","uri":"dacp://h:1/d/t","inputs":[]},
    {"id":"f","kind":"op.filter","predicate":"x > 3","inputs":["g"]}],"sink":"f"})"),
                     mem.context());
  check_same_rows(out.collect_rows(), int_rows(4, 6));
}

TEST_CASE("limit stops pulling its source") {
  MemoryContext mem;
  const std::int64_t n = 1'000'000;
  auto counter = mem.produced;
  ExecContext ctx;
  auto schema = int_schema();
  ctx.open_source = [&](const DagNode&) {
    auto next = std::make_shared<std::int64_t>(0);
    return StreamingDataFrame::from_function(schema, [=]() -> std::optional<RecordBatch> {
      if (*next >= n) return std::nullopt;
      ColumnBuilder b(DataType::Int64);
      for (int i = 0; i < 100; ++i) b.append_int64((*next)++);
      ++*counter;
      return RecordBatch(schema, {std::make_shared<const Column>(b.finish())}, 100);
    });
  };
  auto out = execute(parse_dag(R"({"nodes":[
    {"id":"g","kind":"source.get","uri":"dacp://h:1/d/t","inputs":[]},
    {"id":"l","kind":"op.limit","n":5,"inputs":["g"]}],"sink":"l"})"),
                     ctx);
  CHECK(*counter == 0);
  check_same_rows(out.collect_rows(), int_rows(0, 4));
  CHECK(*counter <= 1);
}

TEST_CASE("sources stay idle until the first pull") {
  MemoryContext mem;
  mem.tables["dacp://h:1/d/t"] = {int_schema(), int_rows(1, 500), 10};
  auto out = execute(parse_dag(R"({"nodes":[
    {"id":"g","kind":"source.get","uri":"dacp://h:1/d/t","inputs":[]},
    {"id":"f","kind":"op.filter","predicate":"x > 0","inputs":["g"]},
    {"id":"m","kind":"op.map","new_column":"y","expr":"x * 2","inputs":["f"]}],"sink":"m"})"),
                     mem.context());
  CHECK(*mem.produced == 0);
  auto it = out.rows().begin();
  CHECK(std::get<std::int64_t>((*it)[1]) == 2);
  CHECK(*mem.produced == 1);
}

TEST_CASE("union drains its left input before its right") {
  MemoryContext mem;
  mem.tables["dacp://h:1/d/l"] = {int_schema(), int_rows(1, 5), 2};
  mem.tables["dacp://h:1/d/r"] = {int_schema(), int_rows(10, 12), 2};
  auto out = execute(parse_dag(R"({"nodes":[
    {"id":"l","kind":"source.get","uri":"dacp://h:1/d/l","inputs":[]},
    {"id":"r","kind":"source.get","uri":"dacp://h:1/d/r","inputs":[]},
    {"id":"u","kind":"op.union","inputs":["l","r"]}],"sink":"u"})"),
                     mem.context());
  auto want = int_rows(1, 5);
  for (auto& r : int_rows(10, 12)) want.push_back(r);
  check_same_rows(out.collect_rows(), want);
}

TEST_CASE("null comparisons are false and NOT flips them") {
  MemoryContext mem;
  mem.tables["dacp://h:1/d/t"] = {int_schema(), {{Value{}}, {Value{std::int64_t{5}}}}, 8};
  auto run = [&](const char* pred) {
    DagTask t = parse_dag(std::string(R"({"nodes":[{"id":"g","kind":"source.get","uri":"dacp://h:1/d/t","inputs":[]},
      {"id":"f","kind":"op.filter","predicate":")") + pred + R"(","inputs":["g"]}],"sink":"f"})");
    return execute(t, mem.context()).collect_rows().size();
  };
  CHECK(run("x = 5") == 1);
  CHECK(run("x != 5") == 0);
  CHECK(run("NOT x = 5") == 1);
  CHECK(run("NOT x != 5") == 2);
}

TEST_CASE("map division rules") {
  auto schema = make_schema({{"x", DataType::Int64, true}, {"y", DataType::Int64, true}, {"f", DataType::Float64, true}});
  MemoryContext mem;
  mem.tables["dacp://h:1/d/t"] = {schema,
                                  {{Value{std::int64_t{7}}, Value{std::int64_t{2}}, Value{0.0}},
                                   {Value{std::int64_t{7}}, Value{std::int64_t{0}}, Value{-0.0}},
                                   {Value{}, Value{std::int64_t{1}}, Value{1.0}}},
                                  8};
  auto run = [&](const char* expr) {
    DagTask t = parse_dag(std::string(R"({"nodes":[{"id":"g","kind":"source.get","uri":"dacp://h:1/d/t","inputs":[]},
      {"id":"m","kind":"op.map","new_column":"r","expr":")") + expr + R"(","inputs":["g"]}],"sink":"m"})");
    std::vector<Value> out;
    for (auto& r : execute(t, mem.context()).collect_rows()) out.push_back(r[3]);
    return out;
  };
  auto div = run("x / y");
  CHECK(std::get<double>(div[0]) == 3.5);
  CHECK(is_null(div[1]));
  CHECK(is_null(div[2]));
  auto fdiv = run("x / f");
  CHECK(std::isinf(std::get<double>(fdiv[0])));
  CHECK(std::get<double>(fdiv[0]) > 0);
  CHECK(std::get<double>(fdiv[1]) < 0);
  auto wrap = run("x * 9223372036854775807");
  CHECK(std::get<std::int64_t>(wrap[0]) == static_cast<std::int64_t>(7ull * 9223372036854775807ull));
}

TEST_CASE("producer errors poison the result with their code") {
  ExecContext ctx;
  auto schema = int_schema();
  ctx.open_source = [&](const DagNode&) {
    auto calls = std::make_shared<int>(0);
    return StreamingDataFrame::from_function(schema, [=]() -> std::optional<RecordBatch> {
      if ((*calls)++ == 0) return RecordBatch::from_rows(schema, int_rows(1, 3));
      throw Error::forbidden("gone");
    });
  };
  auto out = execute(parse_dag(R"({"nodes":[
    {"id":"g","kind":"source.get","uri":"dacp://h:1/d/t","inputs":[]},
    {"id":"f","kind":"op.filter","predicate":"x > 0","inputs":["g"]}],"sink":"f"})"),
                     ctx);
  CHECK(out.next_batch().has_value());
  CHECK(code_of([&] { out.next_batch(); }) == ErrorCode::Forbidden);
  CHECK(code_of([&] { out.next_batch(); }) == ErrorCode::Forbidden);
}

TEST_CASE("engine matches the reference interpreter, planned or not") {
  testing::Rng rng(2024);
  auto schema = testing::random_table_schema();
  const std::vector<std::string> uris{"dacp://h:1/d/one", "dacp://h:1/d/two"};
  MemoryContext mem;
  std::map<std::string, testing::Table> tables;
  for (std::size_t i = 0; i < uris.size(); ++i) {
    auto rows = testing::random_table_rows(rng, 600 + 150 * i, static_cast<std::int64_t>(i) * 10000);
    mem.tables[uris[i]] = {schema, rows, static_cast<std::size_t>(37 + i * 50)};
    tables[uris[i]] = testing::Table::of(*schema, rows);
  }
  testing::Oracle oracle(tables);
  testing::RandomTaskBuilder builder(rng, uris, schema);
  for (int i = 0; i < 200; ++i) {
    DagTask t = parse_dag(to_json(builder.build()));
    INFO(to_json(t));
    auto want = oracle.run(t);
    auto got = execute(t, mem.context()).collect_rows();
    check_same_rows(got, want.rows);
    DagTask planned = plan(t);
    INFO(to_json(planned));
    check_same_rows(execute(planned, mem.context()).collect_rows(), want.rows);
  }
}
