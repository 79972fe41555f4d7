// SPDX-License-Identifier: Apache-2.0
#include "dacp/datasource/sources.hpp"

#include <sys/stat.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <cstring>

#include "dacp/datasource/csv.hpp"
#include "dacp/error.hpp"

namespace fs = std::filesystem;

namespace dacp::datasource {
namespace {

constexpr std::size_t kReadBufferBytes = 16 * 1024;

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const fs::path& p) {
  FilePtr f(std::fopen(p.c_str(), "rb"));
  if (!f) throw Error::not_found("cannot open " + p.filename().string() + ": " + std::strerror(errno));
  std::setvbuf(f.get(), nullptr, _IONBF, 0);
  return f;
}

/// Buffered byte input that records how many bytes it pulled from disk.
class CountingInput {
 public:
  CountingInput(FilePtr f, std::shared_ptr<SourceStats> stats) : file_(std::move(f)), stats_(std::move(stats)) {
    buf_.resize(kReadBufferBytes);
  }

  int get() {
    if (pos_ == end_ && !fill()) return -1;
    return static_cast<unsigned char>(buf_[pos_++]);
  }
  int peek() {
    if (pos_ == end_ && !fill()) return -1;
    return static_cast<unsigned char>(buf_[pos_]);
  }

 private:
  bool fill() {
    if (eof_) return false;
    std::size_t n = std::fread(buf_.data(), 1, buf_.size(), file_.get());
    if (n == 0) {
      if (std::ferror(file_.get())) throw Error::internal("read error");
      eof_ = true;
      return false;
    }
    if (stats_) stats_->bytes_read += n;
    pos_ = 0;
    end_ = n;
    return true;
  }

  FilePtr file_;
  std::shared_ptr<SourceStats> stats_;
  std::vector<char> buf_;
  std::size_t pos_ = 0;
  std::size_t end_ = 0;
  bool eof_ = false;
};

/// RFC-4180 record parser. Accepts LF or CRLF line ends and quoted fields
/// spanning lines.
class CsvParser {
 public:
  explicit CsvParser(CountingInput& in) : in_(in) {
    // UTF-8 byte order mark.
    if (in_.peek() == 0xEF) {
      in_.get();
      if (in_.get() != 0xBB || in_.get() != 0xBF) throw Error::bad_request("CSV starts with a broken byte order mark");
    }
  }

  /// Reads the next record into `cells`; false at end of input.
  bool next(std::vector<CsvCell>& cells) {
    cells.clear();
    int c = in_.peek();
    if (c < 0) return false;
    ++line_;
    CsvCell cell;
    while (true) {
      c = in_.get();
      if (c < 0) {
        cells.push_back(std::move(cell));
        return true;
      }
      if (c == '"' && cell.text.empty() && !cell.quoted) {
        cell.quoted = true;
        read_quoted(cell.text);
        continue;
      }
      if (c == ',') {
        cells.push_back(std::move(cell));
        cell = CsvCell{};
        continue;
      }
      if (c == '\r') {
        if (in_.peek() == '\n') in_.get();
        cells.push_back(std::move(cell));
        return true;
      }
      if (c == '\n') {
        cells.push_back(std::move(cell));
        return true;
      }
      cell.text.push_back(static_cast<char>(c));
    }
  }

  std::size_t line() const { return line_; }

 private:
  void read_quoted(std::string& out) {
    while (true) {
      int c = in_.get();
      if (c < 0) throw Error::bad_request("unterminated quoted CSV field near line " + std::to_string(line_));
      if (c == '"') {
        if (in_.peek() == '"') {
          in_.get();
          out.push_back('"');
          continue;
        }
        return;
      }
      if (c == '\n') ++line_;
      out.push_back(static_cast<char>(c));
    }
  }

  CountingInput& in_;
  std::size_t line_ = 0;
};

bool is_blank(const std::vector<CsvCell>& cells) { return cells.size() == 1 && cells[0].is_null(); }

bool looks_integer(std::string_view s) {
  std::int64_t v;
  if (s.empty()) return false;
  const char* b = s.data();
  if (*b == '+') ++b;
  auto [p, ec] = std::from_chars(b, s.data() + s.size(), v);
  return ec == std::errc() && p == s.data() + s.size();
}

/// Decimal number syntax only; "inf"/"nan" words do not make a column numeric.
bool looks_number(std::string_view s) {
  std::size_t i = 0;
  if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
  std::size_t digits = 0;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i, ++digits;
  if (i < s.size() && s[i] == '.') {
    ++i;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i, ++digits;
  }
  if (digits == 0) return false;
  if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
    ++i;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
    std::size_t exp = 0;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i, ++exp;
    if (exp == 0) return false;
  }
  if (i != s.size()) return false;
  double v;
  const char* b = s.data();
  if (*b == '+') ++b;
  auto [p, ec] = std::from_chars(b, s.data() + s.size(), v);
  return ec == std::errc() && p == s.data() + s.size();
}

bool looks_bool(std::string_view s) {
  auto lower = [](std::string_view x) {
    std::string o(x);
    for (auto& ch : o) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return o;
  };
  if (s.size() != 4 && s.size() != 5) return false;
  std::string l = lower(s);
  return l == "true" || l == "false";
}

struct ColumnGuess {
  bool all_int = true;
  bool all_num = true;
  bool all_bool = true;
  bool any_value = false;
  bool any_null = false;

  void observe(const CsvCell& c) {
    if (c.is_null()) {
      any_null = true;
      return;
    }
    any_value = true;
    if (all_int && !looks_integer(c.text)) all_int = false;
    if (all_num && !looks_number(c.text)) all_num = false;
    if (all_bool && !looks_bool(c.text)) all_bool = false;
  }

  Field field(std::string name) const {
    Field f{std::move(name), DataType::Utf8, any_null};
    if (!any_value) {
      f.nullable = true;
    } else if (all_int) {
      f.type = DataType::Int64;
    } else if (all_num) {
      f.type = DataType::Float64;
    } else if (all_bool) {
      f.type = DataType::Bool;
    }
    return f;
  }
};

class CsvProducer final : public BatchProducer {
 public:
  CsvProducer(fs::path path, const OpenOptions& opts)
      : name_(path.filename().string()), opts_(opts), input_(open_file(path), opts.stats), parser_(input_) {
    if (opts_.stats) ++opts_.stats->opens;
    std::vector<CsvCell> header;
    if (!parser_.next(header)) throw Error::bad_request(name_ + ": empty CSV file (no header)");
    std::vector<std::string> names;
    for (auto& h : header) names.push_back(std::move(h.text));
    for (const auto& n : names) {
      if (!is_valid_field_name(n)) throw Error::bad_request(name_ + ": invalid column name '" + n + "'");
    }

    auto sidecar = read_schema_sidecar(schema_sidecar_path(path));
    bool use_sidecar = false;
    if (sidecar && sidecar->size() == names.size()) {
      use_sidecar = true;
      for (std::size_t i = 0; i < names.size(); ++i) use_sidecar = use_sidecar && sidecar->field(i).name == names[i];
    }

    // Sample rows are kept as parsed cells and emitted first.
    std::vector<ColumnGuess> guesses(names.size());
    std::vector<CsvCell> cells;
    while (sample_.size() < kCsvSampleRows && read_record(cells, names.size())) {
      if (!use_sidecar) {
        for (std::size_t i = 0; i < cells.size(); ++i) guesses[i].observe(cells[i]);
      }
      sample_.push_back(std::move(cells));
      cells = {};
    }

    if (use_sidecar) {
      schema_ = std::make_shared<const Schema>(*sidecar);
    } else {
      std::vector<Field> fields;
      for (std::size_t i = 0; i < names.size(); ++i) fields.push_back(guesses[i].field(names[i]));
      try {
        schema_ = make_schema(std::move(fields));
      } catch (const Error& e) {
        throw Error::bad_request(name_ + ": " + e.what());
      }
    }
  }

  SchemaPtr schema() const { return schema_; }

  std::optional<RecordBatch> produce() override {
    if (done_) return std::nullopt;
    const std::size_t ncols = schema_->size();
    std::vector<ColumnBuilder> builders;
    builders.reserve(ncols);
    for (const auto& f : schema_->fields()) builders.emplace_back(f.type, opts_.batch_rows);

    std::size_t rows = 0;
    std::vector<CsvCell> cells;
    while (rows < opts_.batch_rows) {
      if (sample_pos_ < sample_.size()) {
        append_row(builders, sample_[sample_pos_]);
        if (++sample_pos_ == sample_.size()) {
          sample_.clear();
          sample_.shrink_to_fit();
          sample_pos_ = 0;
        }
      } else {
        if (!read_record(cells, ncols)) {
          done_ = true;
          break;
        }
        append_row(builders, cells);
      }
      ++row_number_;
      ++rows;
    }
    if (rows == 0) return std::nullopt;
    std::vector<ColumnPtr> cols;
    cols.reserve(ncols);
    for (auto& b : builders) cols.push_back(std::make_shared<const Column>(b.finish()));
    if (opts_.stats) {
      ++opts_.stats->batches_produced;
      opts_.stats->rows_produced += rows;
    }
    return RecordBatch(schema_, std::move(cols), rows);
  }

 private:
  bool read_record(std::vector<CsvCell>& cells, std::size_t expected) {
    while (parser_.next(cells)) {
      if (cells.size() == expected) return true;
      if (is_blank(cells)) {
        if (expected == 1) return true;
        continue;
      }
      throw Error::bad_request(name_ + ": line " + std::to_string(parser_.line()) + " has " +
                               std::to_string(cells.size()) + " fields, header has " + std::to_string(expected));
    }
    return false;
  }

  void append_row(std::vector<ColumnBuilder>& builders, const std::vector<CsvCell>& cells) {
    for (std::size_t i = 0; i < builders.size(); ++i) {
      try {
        append_csv_cell(builders[i], cells[i], schema_->field(i));
      } catch (const Error& e) {
        throw Error::type_error(name_ + ": data row " + std::to_string(row_number_ + 1) + ": " + e.what());
      }
    }
  }

  std::string name_;
  OpenOptions opts_;
  CountingInput input_;
  CsvParser parser_;
  SchemaPtr schema_;
  std::vector<std::vector<CsvCell>> sample_;
  std::size_t sample_pos_ = 0;
  bool done_ = false;
  std::size_t row_number_ = 0;
};

std::string lower_extension(const fs::path& p) {
  std::string ext = p.extension().string();
  if (!ext.empty()) ext.erase(0, 1);
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

class BinaryProducer final : public BatchProducer {
 public:
  BinaryProducer(const fs::path& path, const OpenOptions& opts) : file_(open_file(path)), opts_(opts) {
    if (opts_.stats) ++opts_.stats->opens;
    if (opts_.chunk_size == 0) throw Error::bad_request("chunk size must be positive");
  }

  std::optional<RecordBatch> produce() override {
    if (done_) return std::nullopt;
    ColumnBuilder index(DataType::Int64);
    ColumnBuilder data(DataType::Binary);
    std::string chunk(opts_.chunk_size, '\0');
    std::size_t rows = 0;
    while (rows < std::max<std::size_t>(1, opts_.chunks_per_batch)) {
      std::size_t got = 0;
      while (got < chunk.size()) {
        std::size_t n = std::fread(chunk.data() + got, 1, chunk.size() - got, file_.get());
        if (n == 0) break;
        got += n;
      }
      if (std::ferror(file_.get())) throw Error::internal("read error");
      if (opts_.stats) opts_.stats->bytes_read += got;
      if (got == 0) {
        done_ = true;
        break;
      }
      index.append_int64(static_cast<std::int64_t>(next_index_++));
      data.append_bytes(std::string_view(chunk.data(), got));
      ++rows;
      if (got < chunk.size()) {
        done_ = true;
        break;
      }
    }
    if (rows == 0) return std::nullopt;
    if (opts_.stats) {
      ++opts_.stats->batches_produced;
      opts_.stats->rows_produced += rows;
    }
    return RecordBatch(binary_chunk_schema(),
                       {std::make_shared<const Column>(index.finish()), std::make_shared<const Column>(data.finish())},
                       rows);
  }

 private:
  FilePtr file_;
  OpenOptions opts_;
  std::uint64_t next_index_ = 0;
  bool done_ = false;
};

struct DirEntryInfo {
  std::string name;
  std::uint64_t size = 0;
  std::int64_t mtime = 0;
};

}  // namespace

SchemaPtr file_list_schema() {
  static const SchemaPtr schema = make_schema({
      {"name", DataType::Utf8, false},
      {"path", DataType::Utf8, false},
      {"format", DataType::Utf8, false},
      {"size_bytes", DataType::Int64, false},
      {"modified_unix", DataType::Int64, false},
      {"content", DataType::BlobRef, false},
  });
  return schema;
}

SchemaPtr binary_chunk_schema() {
  static const SchemaPtr schema = make_schema({
      {"chunk_index", DataType::Int64, false},
      {"data", DataType::Binary, false},
  });
  return schema;
}

StreamingDataFrame open_csv(const fs::path& file, const OpenOptions& options) {
  if (options.batch_rows == 0) throw Error::bad_request("batch size must be positive");
  auto producer = std::make_unique<CsvProducer>(file, options);
  SchemaPtr schema = producer->schema();
  return StreamingDataFrame(std::move(schema), std::move(producer));
}

StreamingDataFrame open_csv(const ResolvedResource& resource, const OpenOptions& options) {
  return open_csv(resource.absolute_path, options);
}

StreamingDataFrame open_binary(const fs::path& file, const OpenOptions& options) {
  return StreamingDataFrame(binary_chunk_schema(), std::make_unique<BinaryProducer>(file, options));
}

StreamingDataFrame open_binary(const ResolvedResource& resource, const OpenOptions& options) {
  return open_binary(resource.absolute_path, options);
}

StreamingDataFrame open_directory(const ResolvedResource& resource, const OpenOptions& options) {
  std::error_code ec;
  fs::directory_iterator it(resource.absolute_path, ec);
  if (ec) throw Error::not_found("cannot list " + resource.relative_path + ": " + ec.message());
  if (options.stats) ++options.stats->opens;

  // Only names and stat data are held; rows are built batch by batch.
  std::vector<DirEntryInfo> entries;
  for (const auto& de : it) {
    std::string name = de.path().filename().string();
    if (name.empty() || name[0] == '.') continue;
    struct stat st {};
    if (::stat(de.path().c_str(), &st) != 0) continue;
    if (!S_ISREG(st.st_mode) && !S_ISDIR(st.st_mode)) continue;
    DirEntryInfo info{name, S_ISREG(st.st_mode) ? static_cast<std::uint64_t>(st.st_size) : 0,
                      static_cast<std::int64_t>(st.st_mtime)};
    entries.push_back(std::move(info));
  }
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.name < b.name; });

  auto shared = std::make_shared<std::vector<DirEntryInfo>>(std::move(entries));
  const std::string prefix = resource.relative_path.empty() ? "" : resource.relative_path + "/";
  const std::string uri_prefix = "dacp://" + resource.authority + "/" + resource.dataset_name + "/" + prefix;
  std::size_t next = 0;
  const std::size_t batch_rows = std::max<std::size_t>(1, options.batch_rows);
  auto stats = options.stats;
  return StreamingDataFrame::from_function(
      file_list_schema(), [=]() mutable -> std::optional<RecordBatch> {
        if (next >= shared->size()) return std::nullopt;
        const std::size_t end = std::min(shared->size(), next + batch_rows);
        ColumnBuilder name(DataType::Utf8), path(DataType::Utf8), format(DataType::Utf8),
            size(DataType::Int64), mtime(DataType::Int64), content(DataType::BlobRef);
        for (std::size_t i = next; i < end; ++i) {
          const auto& e = (*shared)[i];
          name.append_bytes(e.name);
          path.append_bytes(prefix + e.name);
          format.append_bytes(lower_extension(e.name));
          size.append_int64(static_cast<std::int64_t>(e.size));
          mtime.append_int64(e.mtime);
          content.append_blob(uri_prefix + e.name, e.size);
        }
        const std::size_t rows = end - next;
        next = end;
        if (stats) {
          ++stats->batches_produced;
          stats->rows_produced += rows;
        }
        std::vector<ColumnPtr> cols;
        for (auto* b : {&name, &path, &format, &size, &mtime, &content}) {
          cols.push_back(std::make_shared<const Column>(b->finish()));
        }
        return RecordBatch(file_list_schema(), std::move(cols), rows);
      });
}

StreamingDataFrame open_resource(const ResolvedResource& resource, const OpenOptions& options) {
  switch (resource.kind) {
    case ResourceKind::CsvFile: return open_csv(resource, options);
    case ResourceKind::BinaryFile: return open_binary(resource, options);
    case ResourceKind::Directory: return open_directory(resource, options);
  }
  throw Error::internal("unknown resource kind");
}

StreamingDataFrame expand_blob(const BlobRef& blob, const DatasetRegistry& registry, const OpenOptions& options) {
  return open_resource(resolve(blob.uri, registry), options);
}

}  // namespace dacp::datasource
