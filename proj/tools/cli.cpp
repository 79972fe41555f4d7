// SPDX-License-Identifier: Apache-2.0
#include "cli.hpp"

#include <CLI11.hpp>
#include <unistd.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <regex>
#include <set>
#include <sstream>

#include "dacp/client/connection.hpp"
#include "dacp/client/render.hpp"
#include "dacp/dag/task.hpp"
#include "dacp/datasource/sources.hpp"
#include "dacp/federation/federation.hpp"
#include "dacp/net/traffic.hpp"
#include "dacp/uri.hpp"

namespace fs = std::filesystem;
using Steady = std::chrono::steady_clock;

namespace dacp::cli {
namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::string user;
  std::string password;
  std::uint32_t window = 4;
};

client::Credentials credentials(const Globals& g) {
  if (!g.user.empty()) return client::Credentials::basic(g.user, g.password);
  if (const char* t = std::getenv("DACP_TOKEN"); t && *t) return client::Credentials::bearer(t);
  return client::Credentials::anonymous();
}

client::ClientOptions client_options(const Globals& g, std::shared_ptr<net::TrafficCounters> counters = nullptr) {
  client::ClientOptions o;
  o.window = g.window;
  o.counters = std::move(counters);
  return o;
}

Uri parse_target(const std::string& text) {
  auto u = parse_uri(text);
  if (!u) throw UsageError("not a dacp URI: '" + text + "'");
  return *u;
}

Endpoint endpoint_of(const Uri& u) { return Endpoint{u.host, u.port}; }

client::OutputFormat format_of(const std::string& s) {
  auto f = client::output_format_from_string(s);
  if (!f) throw UsageError("unknown output format '" + s + "'");
  return *f;
}

/// Renders to `-o FILE` when given, else to `out`.
std::uint64_t emit(StreamingDataFrame& data, client::OutputFormat format, const std::string& file, std::ostream& out) {
  std::ofstream f;
  std::ostream* target = &out;
  if (!file.empty()) {
    f.open(file, std::ios::binary | std::ios::trunc);
    if (!f) throw UsageError("cannot write " + file);
    target = &f;
  }
  auto renderer = client::make_renderer(format, *target);
  return client::render(data, *renderer);
}

std::vector<std::string> split_columns(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) throw UsageError("empty column name in --columns");
    out.push_back(item);
  }
  return out;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

/// Distinct authorities named by dacp URIs in a DAG document.
std::vector<std::string> authorities_in(const std::string& document) {
  static const std::regex uri_re(R"(dacp://(\[[^\]]*\]|[^/:"\s]+):(\d+))");
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (std::sregex_iterator it(document.begin(), document.end(), uri_re), end; it != end; ++it) {
    std::string a = (*it)[1].str() + ":" + (*it)[2].str();
    if (seen.insert(a).second) out.push_back(a);
  }
  return out;
}

void print_rate(std::ostream& out, const char* label, double bytes, double seconds) {
  double mbps = seconds > 0 ? bytes / (1024.0 * 1024.0) / seconds : 0.0;
  out << "  " << std::left << std::setw(10) << label << std::right << std::fixed << std::setprecision(2)
      << std::setw(10) << seconds * 1000.0 << " ms " << std::setw(10) << mbps << " MB/s";
}

struct BenchTarget {
  std::string uri;
  std::string relative;
  std::uint64_t size = 0;
};

int cmd_bench(const Globals& g, const std::string& target, const std::string& baseline_dir, std::ostream& out) {
  Uri root = parse_target(target);
  std::vector<BenchTarget> targets;
  {
    auto conn = client::Connection::connect(endpoint_of(root), credentials(g), client_options(g));
    auto listing = conn.get(target);
    if (listing.schema() == *datasource::file_list_schema()) {
      for (const Row& r : listing.collect_rows()) {
        auto size = static_cast<std::uint64_t>(std::get<std::int64_t>(r[3]));
        if (size == 0) continue;
        targets.push_back({std::get<BlobRef>(r[5]).uri, std::get<std::string>(r[0]), size});
      }
    } else {
      // dropping the unread stream closes this connection
      targets.push_back({target, fs::path(root.path).filename().string(), 0});
    }
  }

  double dacp_bytes = 0, dacp_secs = 0, base_bytes = 0, base_secs = 0;
  std::uint64_t wire_total = 0;
  for (auto& t : targets) {
    auto counters = std::make_shared<net::TrafficCounters>();
    auto conn = client::Connection::connect(endpoint_of(parse_target(t.uri)), credentials(g), client_options(g, counters));
    auto start = Steady::now();
    auto sdf = conn.get(t.uri);
    std::optional<Steady::time_point> first;
    std::uint64_t rows = 0;
    while (auto b = sdf.next_batch()) {
      if (!first) first = Steady::now();
      rows += b->num_rows();
    }
    double secs = std::chrono::duration<double>(Steady::now() - start).count();
    double ttfb = first ? std::chrono::duration<double>(*first - start).count() : secs;
    std::uint64_t wire = counters->total_bytes_in();
    if (t.size == 0) t.size = counters->payload_in(wire::MsgType::Batch);
    wire_total += wire;
    dacp_bytes += static_cast<double>(t.size);
    dacp_secs += secs;

    out << t.relative << " (" << t.size << " bytes, " << rows << " rows)\n";
    print_rate(out, "dacp", static_cast<double>(t.size), secs);
    out << "  first batch " << std::setprecision(2) << ttfb * 1000.0 << " ms, wire " << wire << " bytes\n";

    if (!baseline_dir.empty()) {
      fs::path src = fs::path(baseline_dir) / t.relative;
      auto b0 = Steady::now();
      std::string content = read_text(src.string());
      fs::path copy = fs::temp_directory_path() / ("dacp-bench-" + std::to_string(::getpid()));
      {
        std::ofstream o(copy, std::ios::binary | std::ios::trunc);
        o.write(content.data(), static_cast<std::streamsize>(content.size()));
      }
      double bsecs = std::chrono::duration<double>(Steady::now() - b0).count();
      std::error_code ec;
      fs::remove(copy, ec);
      base_bytes += static_cast<double>(content.size());
      base_secs += bsecs;
      print_rate(out, "baseline", static_cast<double>(content.size()), bsecs);
      out << "\n";
    }
  }
  out << "total: " << targets.size() << " files, wire " << wire_total << " bytes\n";
  print_rate(out, "dacp", dacp_bytes, dacp_secs);
  out << "\n";
  if (!baseline_dir.empty()) {
    print_rate(out, "baseline", base_bytes, base_secs);
    out << "\n";
  }
  return kExitOk;
}

int cmd_cook(const Globals& g, const std::string& dag_file, const std::string& server, bool federate,
             client::OutputFormat format, const std::string& file, std::ostream& out) {
  std::string document = read_text(dag_file);
  auto authorities = authorities_in(document);

  if (federate || (server.empty() && authorities.size() > 1)) {
    // The federation coordinator runs here.
    dag::DagTask task = dag::parse_dag(document);
    auto creds = credentials(g);
    federation::OrchestrateOptions opts;
    opts.client = client_options(g);
    auto sdf = federation::run_federated(task, std::nullopt, [&](const Endpoint&) { return creds; }, opts);
    emit(sdf, format, file, out);
    return kExitOk;
  }

  std::optional<Endpoint> ep;
  if (!server.empty()) {
    ep = parse_endpoint(server);
    if (!ep) throw UsageError("bad --server address '" + server + "'");
  } else if (!authorities.empty()) {
    ep = parse_endpoint(authorities.front());
  }
  if (!ep) throw UsageError("no server: the DAG names no dacp URI; pass --server host:port");
  auto conn = client::Connection::connect(*ep, credentials(g), client_options(g));
  auto sdf = conn.cook(document);
  emit(sdf, format, file, out);
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"DACP command line client", "dacp"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--user", g.user, "Username for basic authentication");
  app.add_option("--password", g.password, "Password for basic authentication");
  app.add_option("--window", g.window, "Credit window in batches")->check(CLI::Range(1u, 1024u));
  app.footer("Without --user, DACP_TOKEN is used as a pre-issued session token when set.");

  std::string uri, columns, where, ls_output, get_output, cook_output, file, local, dag_file, server, baseline;
  bool federate = false;

  auto* ls = app.add_subcommand("ls", "List a directory");
  ls->add_option("uri", uri)->required();
  ls->add_option("--output", ls_output, "csv, jsonl or table")->default_val("table");
  ls->add_option("-o", file, "Write to FILE");

  auto* get = app.add_subcommand("get", "Fetch a resource");
  get->add_option("uri", uri)->required();
  get->add_option("--columns", columns, "Comma separated projection");
  get->add_option("--where", where, "Row predicate");
  get->add_option("--output", get_output, "csv, jsonl or table")->default_val("csv");
  get->add_option("-o", file, "Write to FILE");

  auto* put = app.add_subcommand("put", "Upload a local CSV or binary file");
  put->add_option("uri", uri)->required();
  put->add_option("file", local)->required()->check(CLI::ExistingFile);

  auto* cook = app.add_subcommand("cook", "Run a DAG document");
  cook->add_option("--dag", dag_file, "DAG document")->required();
  cook->add_option("--server", server, "host:port to submit to (default: first URI in the DAG)");
  cook->add_flag("--federate", federate, "Coordinate locally and ship fragments to each source's server");
  cook->add_option("--output", cook_output, "csv, jsonl or table")->default_val("csv");
  cook->add_option("-o", file, "Write to FILE");

  auto* bench = app.add_subcommand("bench", "Time GET against a whole-file copy");
  bench->add_option("uri", uri)->required();
  bench->add_option("--baseline-dir", baseline, "Local directory holding the same files");

  std::vector<std::string> argv_store{"dacp"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (*ls) {
      Uri u = parse_target(uri);
      auto conn = client::Connection::connect(endpoint_of(u), credentials(g), client_options(g));
      auto sdf = conn.get(uri, std::vector<std::string>{"name", "path", "format", "size_bytes", "modified_unix"});
      emit(sdf, format_of(ls_output), file, out);
    } else if (*get) {
      auto fmt = format_of(get_output);
      Uri u = parse_target(uri);
      std::optional<std::vector<std::string>> proj;
      if (!columns.empty()) proj = split_columns(columns);
      std::optional<std::string> pred;
      if (!where.empty()) pred = where;
      auto conn = client::Connection::connect(endpoint_of(u), credentials(g), client_options(g));
      auto sdf = conn.get(uri, proj, pred);
      emit(sdf, fmt, file, out);
    } else if (*put) {
      Uri u = parse_target(uri);
      fs::path path(local);
      std::string ext = path.extension().string();
      for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      StreamingDataFrame data = ext == ".csv" ? datasource::open_csv(path) : datasource::open_binary(path);
      auto conn = client::Connection::connect(endpoint_of(u), credentials(g), client_options(g));
      std::uint64_t n = conn.put(uri, std::move(data));
      out << n << " rows written to " << uri << "\n";
    } else if (*cook) {
      return cmd_cook(g, dag_file, server, federate, format_of(cook_output), file, out);
    } else if (*bench) {
      return cmd_bench(g, uri, baseline, out);
    }
    return kExitOk;
  } catch (const UsageError& e) {
    err << "dacp: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    out.flush();
    err << "dacp: " << to_string(e.code()) << " (" << static_cast<int>(e.code()) << "): " << e.what() << "\n";
    return kExitProtocol;
  } catch (const std::exception& e) {
    err << "dacp: " << e.what() << "\n";
    return kExitProtocol;
  }
}

}  // namespace dacp::cli
