// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <limits>

#include "dacp/sdf/frame.hpp"
#include "dacp/wire/codec.hpp"
#include "support/random_data.hpp"

using namespace dacp;
using testing::Rng;

namespace {

SchemaPtr int_schema(bool nullable = false) { return make_schema({{"v", DataType::Int64, nullable}}); }

std::vector<Row> int_rows(std::int64_t n) {
  std::vector<Row> rows;
  for (std::int64_t i = 0; i < n; ++i) rows.push_back({Value{i}});
  return rows;
}

/// Source that counts how often it is asked for a batch.
StreamingDataFrame counting(std::size_t total_rows, std::size_t batch_rows, std::size_t& produced) {
  auto schema = int_schema();
  auto next = std::make_shared<std::size_t>(0);
  return StreamingDataFrame::from_function(schema, [=, &produced]() -> std::optional<RecordBatch> {
    if (*next >= total_rows) return std::nullopt;
    std::size_t n = std::min(batch_rows, total_rows - *next);
    std::vector<Row> rows;
    for (std::size_t i = 0; i < n; ++i) rows.push_back({Value{static_cast<std::int64_t>(*next + i)}});
    *next += n;
    ++produced;
    return RecordBatch::from_rows(schema, rows);
  });
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::Internal;
}

}  // namespace

TEST_SUITE("types") {
  TEST_CASE("type tags are the eight wire values") {
    for (std::uint8_t t = 0; t < 0x20; ++t) {
      bool known = t >= 0x01 && t <= 0x08;
      CHECK(data_type_from_tag(t).has_value() == known);
    }
    for (DataType t : testing::kAllTypes) {
      CHECK(type_from_name(type_name(t)) == t);
    }
  }

  TEST_CASE("schema invariants") {
    CHECK(code_of([] { Schema s({}); }) == ErrorCode::TypeError);
    CHECK(code_of([] { Schema s({{"a", DataType::Int64}, {"a", DataType::Utf8}}); }) == ErrorCode::TypeError);
    CHECK(code_of([] { Schema s({{"a/b", DataType::Int64}}); }) == ErrorCode::TypeError);
    CHECK(code_of([] { Schema s({{std::string("a\0b", 3), DataType::Int64}}); }) == ErrorCode::TypeError);
    CHECK(code_of([] { Schema s({{"", DataType::Int64}}); }) == ErrorCode::TypeError);
    CHECK(code_of([] { Schema s({{"\xff", DataType::Int64}}); }) == ErrorCode::TypeError);
    Schema cased({{"a", DataType::Int64}, {"A", DataType::Int64}});
    CHECK(cased.index_of("A") == 1u);

    std::vector<Field> many;
    for (std::size_t i = 0; i < kMaxFields; ++i) many.push_back({"f" + std::to_string(i), DataType::Bool});
    CHECK(Schema(many).size() == kMaxFields);
    many.push_back({"extra", DataType::Bool});
    CHECK(code_of([&] { Schema s(many); }) == ErrorCode::TypeError);
  }

  TEST_CASE("value equality is bitwise for floats") {
    double nan = std::numeric_limits<double>::quiet_NaN();
    CHECK(same_value(Value{nan}, Value{nan}));
    CHECK_FALSE(same_value(Value{0.0}, Value{-0.0}));
    CHECK_FALSE(same_value(Value{std::int32_t{1}}, Value{std::int64_t{1}}));
    CHECK(same_value(Value{}, Value{}));
  }
}

TEST_SUITE("column") {
  TEST_CASE("validity is LSB-first with zero pad and zeroed null slots") {
    ColumnBuilder b(DataType::Int32);
    for (int i = 0; i < 10; ++i) {
      if (i % 3 == 1) {
        b.append_null();
      } else {
        b.append_int32(i + 100);
      }
    }
    Column c = b.finish();
    REQUIRE(c.validity().size() == 2);
    // rows 1, 4, 7 are null
    CHECK(c.validity()[0] == 0b01101101);
    CHECK(c.validity()[1] == 0b00000011);
    CHECK(c.null_count() == 3);
    for (std::size_t i = 4; i < 8; ++i) CHECK(c.values()[i] == 0);
    CHECK(c.int32_at(9) == 109);
  }

  TEST_CASE("variable-width nulls are zero length") {
    ColumnBuilder b(DataType::Utf8);
    b.append_bytes("a");
    b.append_null();
    b.append_bytes("bc");
    b.append_bytes("");
    Column c = b.finish();
    std::vector<std::uint32_t> offs(c.offsets().begin(), c.offsets().end());
    CHECK(offs == std::vector<std::uint32_t>{0, 1, 1, 3, 3});
    CHECK(c.bytes_at(3).empty());
    CHECK(c.is_valid(3));
    CHECK_FALSE(c.is_valid(1));
  }

  TEST_CASE("builder type checks") {
    ColumnBuilder b(DataType::Int64);
    CHECK(code_of([&] { b.append(Value{std::string("x")}); }) == ErrorCode::TypeError);
    CHECK(code_of([&] { b.append_int32(1); }) == ErrorCode::TypeError);
    ColumnBuilder u(DataType::Utf8);
    CHECK(code_of([&] { u.append_bytes("\xc3\x28"); }) == ErrorCode::TypeError);
    ColumnBuilder r(DataType::BlobRef);
    CHECK(code_of([&] { r.append_blob("http://x/y", 1); }) == ErrorCode::TypeError);
    r.append_blob("dacp://h:1/ds/a.csv", 10);
    CHECK(r.finish().blob_at(0) == BlobRef{"dacp://h:1/ds/a.csv", 10});
  }

  TEST_CASE("take, slice and encoded size agree with the codec") {
    Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
      auto schema = testing::random_schema(rng, 5);
      auto batch = testing::random_batch(rng, schema, 30);
      CHECK(batch.encoded_size() == wire::encode_batch(batch).size());
      if (batch.num_rows() == 0) continue;
      std::size_t off = static_cast<std::size_t>(testing::uniform(rng, 0, static_cast<int>(batch.num_rows()) - 1));
      std::size_t len = static_cast<std::size_t>(testing::uniform(rng, 0, static_cast<int>(batch.num_rows() - off)));
      auto rows = batch.to_rows();
      auto sliced = batch.slice(off, len).to_rows();
      REQUIRE(sliced.size() == len);
      for (std::size_t i = 0; i < len; ++i) CHECK(same_row(sliced[i], rows[off + i]));

      std::vector<std::uint32_t> idx;
      for (int k = testing::uniform(rng, 0, 20); k > 0; --k) {
        idx.push_back(static_cast<std::uint32_t>(testing::uniform(rng, 0, static_cast<int>(batch.num_rows()) - 1)));
      }
      auto taken = batch.take(idx);
      for (std::size_t i = 0; i < idx.size(); ++i) CHECK(same_row(taken.row(i), rows[idx[i]]));
      // derived batches are canonical: same bytes as a batch rebuilt from rows
      CHECK(wire::encode_batch(taken) == wire::encode_batch(RecordBatch::from_rows(schema, taken.to_rows())));
    }
  }
}

TEST_SUITE("record batch") {
  TEST_CASE("from_rows rejects mismatched values") {
    auto s = make_schema({{"a", DataType::Float64, false}});
    CHECK(code_of([&] { RecordBatch::from_rows(s, {{Value{std::int64_t{1}}}}); }) == ErrorCode::TypeError);
    CHECK(code_of([&] { RecordBatch::from_rows(s, {{Value{}}}); }) == ErrorCode::TypeError);
    CHECK(code_of([&] { RecordBatch::from_rows(s, {{Value{1.0}, Value{2.0}}}); }) == ErrorCode::TypeError);
  }

  TEST_CASE("validate_batch names the offending column") {
    auto ints = RecordBatch::from_rows(make_schema({{"x", DataType::Int64, false}}), {{Value{std::int64_t{1}}}});
    Schema wants_float({{"x", DataType::Float64, false}});
    auto v = validate_batch(wants_float, RecordBatch(make_schema(wants_float.fields()), ints.columns(), 1));
    CHECK_FALSE(v.ok());
    CHECK(v.detail.find("'x'") != std::string::npos);

    auto with_null = RecordBatch::from_rows(make_schema({{"y", DataType::Utf8, true}}), {{Value{}}});
    Schema strict({{"y", DataType::Utf8, false}});
    auto v2 = validate_batch(strict, RecordBatch(make_schema(strict.fields()), with_null.columns(), 1));
    CHECK_FALSE(v2.ok());
    CHECK(v2.detail.find("'y'") != std::string::npos);

    auto empty = RecordBatch::from_rows(int_schema(), {});
    CHECK_FALSE(validate_batch(*int_schema(), empty).ok());
  }

  TEST_CASE("generated batches validate") {
    Rng rng(12);
    for (int i = 0; i < 300; ++i) {
      auto schema = testing::random_schema(rng);
      auto batch = testing::random_batch(rng, schema);
      if (batch.num_rows() == 0) continue;
      auto v = validate_batch(*schema, batch);
      CHECK_MESSAGE(v.ok(), v.detail);
    }
  }
}

TEST_SUITE("streaming data frame") {
  TEST_CASE("batching arithmetic") {
    auto sdf = StreamingDataFrame::from_rows(int_schema(), int_rows(10), 4);
    std::vector<std::size_t> sizes;
    while (auto b = sdf.next_batch()) sizes.push_back(b->num_rows());
    CHECK(sizes == std::vector<std::size_t>{4, 4, 2});
    CHECK(sdf.exhausted());
    CHECK_FALSE(sdf.next_batch());
    CHECK_FALSE(sdf.next_batch());

    auto none = StreamingDataFrame::from_rows(int_schema(), {}, 4);
    CHECK_FALSE(none.next_batch());
    CHECK(none.exhausted());
  }

  TEST_CASE("flattening and the single-pass law") {
    Rng rng(13);
    for (int trial = 0; trial < 50; ++trial) {
      auto schema = testing::random_schema(rng, 6);
      auto rows = testing::random_rows(rng, *schema, static_cast<std::size_t>(testing::uniform(rng, 0, 1000)));
      auto batch_rows = static_cast<std::size_t>(testing::uniform(rng, 1, 128));

      auto by_batch = StreamingDataFrame::from_rows(schema, rows, batch_rows);
      std::vector<Row> flat;
      while (auto b = by_batch.next_batch()) {
        CHECK(b->num_rows() <= batch_rows);
        for (auto& r : b->to_rows()) flat.push_back(std::move(r));
      }
      auto by_row = StreamingDataFrame::from_rows(schema, rows, batch_rows);
      std::vector<Row> iterated;
      for (const Row& r : by_row.rows()) iterated.push_back(r);

      REQUIRE(flat.size() == rows.size());
      REQUIRE(iterated.size() == rows.size());
      for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(same_row(flat[i], rows[i]));
        CHECK(same_row(iterated[i], rows[i]));
      }
    }
  }

  TEST_CASE("laziness law") {
    for (std::size_t batch : {1u, 3u, 7u, 64u}) {
      for (std::size_t k : {0u, 1u, 5u, 21u, 100u}) {
        std::size_t produced = 0;
        auto sdf = counting(1000, batch, produced);
        CHECK(produced == 0);
        std::size_t taken = 0;
        if (k > 0) {
          for (auto it = sdf.rows().begin(); it != std::default_sentinel; ++it) {
            if (++taken == k) break;
          }
        }
        CHECK(produced == (k + batch - 1) / batch);
      }
    }
  }

  TEST_CASE("first row of a 100 batch stream pulls one batch") {
    std::size_t produced = 0;
    auto sdf = counting(100, 1, produced);
    auto r = sdf.next_row();
    REQUIRE(r);
    CHECK(produced == 1);
  }

  TEST_CASE("poisoning law") {
    int calls = 0;
    auto sdf = StreamingDataFrame::from_function(int_schema(), [&]() -> std::optional<RecordBatch> {
      if (++calls == 1) return RecordBatch::from_rows(int_schema(), int_rows(2));
      throw Error::not_found("gone");
    });
    CHECK(sdf.next_batch());
    for (int i = 0; i < 3; ++i) CHECK(code_of([&] { sdf.next_batch(); }) == ErrorCode::NotFound);
    CHECK(calls == 2);
    CHECK(sdf.poisoned());
  }

  TEST_CASE("nonconforming batches are rejected on yield") {
    auto sdf = StreamingDataFrame::from_function(make_schema({{"v", DataType::Float64, false}}), [] {
      return std::optional<RecordBatch>(RecordBatch::from_rows(int_schema(), int_rows(1)));
    });
    CHECK(code_of([&] { sdf.next_batch(); }) == ErrorCode::TypeError);
  }

  TEST_CASE("empty batches are skipped") {
    auto s = int_schema();
    auto sdf = StreamingDataFrame::from_batches(
        s, {RecordBatch::from_rows(s, {}), RecordBatch::from_rows(s, int_rows(2)), RecordBatch::from_rows(s, {})});
    CHECK(sdf.collect_batches().size() == 1);
  }

  TEST_CASE("a stream is consumed one way only") {
    auto sdf = StreamingDataFrame::from_rows(int_schema(), int_rows(10), 4);
    CHECK(sdf.next_batch());
    CHECK(code_of([&] { sdf.next_row(); }) == ErrorCode::BadRequest);
    auto other = StreamingDataFrame::from_rows(int_schema(), int_rows(10), 4);
    CHECK(other.next_row());
    CHECK(code_of([&] { other.next_batch(); }) == ErrorCode::BadRequest);
  }
}
