// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dacp/uri.hpp"

namespace dacp::datasource {

enum class Access { Public, Authenticated };

struct DatasetEntry {
  std::string name;
  std::filesystem::path root;
  std::string description;
  Access access = Access::Public;
  /// PUT targets must live in a writable dataset.
  bool writable = false;
};

/// True for names matching [A-Za-z0-9_-]{1,64}.
bool is_valid_dataset_name(std::string_view name);

/// Dataset name -> storage root. Roots are canonicalised when added and must
/// exist at that point.
class DatasetRegistry {
 public:
  DatasetRegistry() = default;

  /// {"datasets": [{"name", "root", "description", "access", "writable"}]}.
  /// Relative roots are taken relative to `base_dir`. Throws
  /// Error(BadRequest) on malformed documents.
  static DatasetRegistry from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
  static DatasetRegistry load_file(const std::filesystem::path& file);

  void add(DatasetEntry entry);
  const DatasetEntry* find(std::string_view name) const;
  std::vector<const DatasetEntry*> entries() const;
  bool has_public() const;
  bool empty() const { return entries_.empty(); }

 private:
  std::map<std::string, DatasetEntry, std::less<>> entries_;
};

enum class ResourceKind { CsvFile, BinaryFile, Directory };

std::string_view to_string(ResourceKind k);

struct ResolvedResource {
  ResourceKind kind = ResourceKind::BinaryFile;
  std::filesystem::path absolute_path;
  std::string dataset_name;
  /// Dataset-relative path, '/'-separated, empty for the dataset root.
  std::string relative_path;
  /// Authority the resource was addressed through; used to mint child URIs.
  std::string authority;
};

/// Maps a URI onto the storage of its dataset.
/// NOT_FOUND: unknown dataset or missing path. FORBIDDEN: a `..` segment or
/// a path (after following symlinks) outside the dataset root.
ResolvedResource resolve(const Uri& uri, const DatasetRegistry& registry);
ResolvedResource resolve(std::string_view uri, const DatasetRegistry& registry);

/// Target of a write: same containment rules, but the leaf need not exist.
/// Returns the absolute path the file would be written to.
std::filesystem::path resolve_for_write(const Uri& uri, const DatasetRegistry& registry);

}  // namespace dacp::datasource
