// SPDX-License-Identifier: Apache-2.0
#include "dacp/datasource/registry.hpp"

#include <algorithm>
#include <fstream>

#include "dacp/error.hpp"

namespace fs = std::filesystem;

namespace dacp::datasource {
namespace {

bool within(const fs::path& root, const fs::path& p) {
  auto r = root.begin();
  auto q = p.begin();
  for (; r != root.end(); ++r, ++q) {
    if (r->empty()) continue;  // trailing separator
    if (q == p.end() || *r != *q) return false;
  }
  return true;
}

/// Splits a dataset-relative path into segments, rejecting `..`.
std::vector<std::string> segments_of(const std::string& path) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= path.size()) {
    std::size_t end = path.find('/', start);
    if (end == std::string::npos) end = path.size();
    std::string seg = path.substr(start, end - start);
    if (seg == "..") throw Error::forbidden("path escapes dataset root: '" + path + "'");
    if (!seg.empty() && seg != ".") out.push_back(std::move(seg));
    start = end + 1;
  }
  return out;
}

const DatasetEntry& lookup(const Uri& uri, const DatasetRegistry& registry) {
  const DatasetEntry* entry = registry.find(uri.dataset);
  if (entry == nullptr) throw Error::not_found("unknown dataset '" + uri.dataset + "'");
  return *entry;
}

std::string join(const std::vector<std::string>& segs) {
  std::string out;
  for (const auto& s : segs) {
    if (!out.empty()) out += '/';
    out += s;
  }
  return out;
}

}  // namespace

bool is_valid_dataset_name(std::string_view name) {
  if (name.empty() || name.size() > 64) return false;
  return std::all_of(name.begin(), name.end(), [](char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
  });
}

std::string_view to_string(ResourceKind k) {
  switch (k) {
    case ResourceKind::CsvFile: return "csv";
    case ResourceKind::BinaryFile: return "binary";
    case ResourceKind::Directory: return "directory";
  }
  return "?";
}

DatasetRegistry DatasetRegistry::from_json(const nlohmann::json& doc, const fs::path& base_dir) {
  if (!doc.is_object() || !doc.contains("datasets") || !doc["datasets"].is_array()) {
    throw Error::bad_request("dataset registry must be an object with a \"datasets\" array");
  }
  DatasetRegistry reg;
  for (const auto& item : doc["datasets"]) {
    if (!item.is_object() || !item.contains("name") || !item.contains("root")) {
      throw Error::bad_request("dataset entries need \"name\" and \"root\"");
    }
    DatasetEntry e;
    try {
      e.name = item.at("name").get<std::string>();
      fs::path root = item.at("root").get<std::string>();
      e.root = root.is_absolute() || base_dir.empty() ? root : base_dir / root;
      e.description = item.value("description", "");
      std::string access = item.value("access", "public");
      if (access == "public") {
        e.access = Access::Public;
      } else if (access == "authenticated") {
        e.access = Access::Authenticated;
      } else {
        throw Error::bad_request("dataset '" + e.name + "': access must be public or authenticated");
      }
      e.writable = item.value("writable", false);
    } catch (const nlohmann::json::exception& ex) {
      throw Error::bad_request(std::string("dataset registry: ") + ex.what());
    }
    reg.add(std::move(e));
  }
  return reg;
}

DatasetRegistry DatasetRegistry::load_file(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw Error::not_found("cannot open dataset registry " + file.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& ex) {
    throw Error::bad_request("dataset registry " + file.string() + ": " + ex.what());
  }
  return from_json(doc, file.parent_path());
}

void DatasetRegistry::add(DatasetEntry entry) {
  if (!is_valid_dataset_name(entry.name)) throw Error::bad_request("invalid dataset name '" + entry.name + "'");
  std::error_code ec;
  if (!fs::is_directory(entry.root, ec)) {
    throw Error::not_found("dataset '" + entry.name + "' root " + entry.root.string() + " is not a directory");
  }
  entry.root = fs::canonical(entry.root);
  if (entries_.count(entry.name)) throw Error::bad_request("duplicate dataset '" + entry.name + "'");
  entries_.emplace(entry.name, std::move(entry));
}

const DatasetEntry* DatasetRegistry::find(std::string_view name) const {
  auto it = entries_.find(name);
  return it == entries_.end() ? nullptr : &it->second;
}

std::vector<const DatasetEntry*> DatasetRegistry::entries() const {
  std::vector<const DatasetEntry*> out;
  for (const auto& [_, e] : entries_) out.push_back(&e);
  return out;
}

bool DatasetRegistry::has_public() const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [](const auto& kv) { return kv.second.access == Access::Public; });
}

ResolvedResource resolve(const Uri& uri, const DatasetRegistry& registry) {
  const DatasetEntry& entry = lookup(uri, registry);
  const auto segs = segments_of(uri.path);
  fs::path candidate = entry.root;
  for (const auto& s : segs) candidate /= s;

  std::error_code ec;
  fs::path real = fs::canonical(candidate, ec);
  if (ec) throw Error::not_found("no such resource: " + uri.to_string());
  if (!within(entry.root, real)) throw Error::forbidden("path escapes dataset root: " + uri.to_string());

  ResolvedResource res;
  res.absolute_path = real;
  res.dataset_name = entry.name;
  res.relative_path = join(segs);
  res.authority = uri.authority();
  if (fs::is_directory(real, ec)) {
    res.kind = ResourceKind::Directory;
  } else if (fs::is_regular_file(real, ec)) {
    std::string ext = real.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    res.kind = ext == ".csv" ? ResourceKind::CsvFile : ResourceKind::BinaryFile;
  } else {
    throw Error::not_found("not a file or directory: " + uri.to_string());
  }
  return res;
}

ResolvedResource resolve(std::string_view uri, const DatasetRegistry& registry) {
  return resolve(parse_uri_or_throw(uri), registry);
}

fs::path resolve_for_write(const Uri& uri, const DatasetRegistry& registry) {
  const DatasetEntry& entry = lookup(uri, registry);
  const auto segs = segments_of(uri.path);
  if (segs.empty()) throw Error::bad_request("cannot write to a dataset root");
  fs::path candidate = entry.root;
  for (const auto& s : segs) candidate /= s;

  // Containment of the deepest existing ancestor, symlinks followed.
  fs::path existing = candidate;
  std::error_code ec;
  while (!fs::exists(fs::symlink_status(existing, ec)) && existing != entry.root) existing = existing.parent_path();
  fs::path real = fs::canonical(existing, ec);
  if (ec || !within(entry.root, real)) throw Error::forbidden("path escapes dataset root: " + uri.to_string());
  if (existing == candidate && fs::is_directory(real, ec)) {
    throw Error::bad_request("write target is a directory: " + uri.to_string());
  }
  if (existing == candidate) return real;
  return real / candidate.lexically_relative(existing);
}

}  // namespace dacp::datasource
