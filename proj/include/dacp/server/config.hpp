// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include <json.hpp>

#include "dacp/sdf/frame.hpp"
#include "dacp/wire/frame.hpp"

namespace dacp::server {

inline constexpr std::uint64_t kDefaultTokenTtlSeconds = 3600;

/// Daemon configuration:
///   {"listen", "datasets_file", "users_file", "batch_size", "frame_cap",
///    "token_ttl_seconds"}
/// Every key is optional. Relative file paths resolve against the
/// directory holding the config file.
struct ServerConfig {
  std::string listen = "127.0.0.1:7070";
  std::filesystem::path datasets_file;
  std::filesystem::path users_file;
  std::size_t batch_size = kDefaultBatchRows;
  std::uint32_t frame_cap = wire::kDefaultFrameCap;
  std::uint64_t token_ttl_seconds = kDefaultTokenTtlSeconds;

  /// Throws Error(BadRequest) on unknown keys or bad values.
  static ServerConfig from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
  static ServerConfig load_file(const std::filesystem::path& file);
};

/// Username to password hash, from [{"username", "password_hash"}].
class UserStore {
 public:
  static UserStore from_json(const nlohmann::json& doc);
  static UserStore load_file(const std::filesystem::path& file);

  void add(std::string username, std::string password_hash);
  bool verify(std::string_view username, std::string_view password) const;
  bool empty() const { return users_.empty(); }
  std::size_t size() const { return users_.size(); }

 private:
  std::map<std::string, std::string, std::less<>> users_;
};

}  // namespace dacp::server
