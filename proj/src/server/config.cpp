// SPDX-License-Identifier: Apache-2.0
#include "dacp/server/config.hpp"

#include <fstream>

#include "dacp/error.hpp"
#include "dacp/uri.hpp"
#include "dacp/util/crypto.hpp"

namespace dacp::server {

namespace {

nlohmann::json read_json(const std::filesystem::path& file, std::string_view what) {
  std::ifstream in(file);
  if (!in) throw Error::not_found("cannot open " + std::string(what) + " " + file.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error::bad_request(std::string(what) + " " + file.string() + ": " + e.what());
  }
}

template <typename T>
T unsigned_field(const nlohmann::json& v, std::string_view key, T min, T max) {
  if (!v.is_number_unsigned()) throw Error::bad_request("config: " + std::string(key) + " must be a non-negative integer");
  const auto x = v.get<std::uint64_t>();
  if (x < min || x > max) {
    throw Error::bad_request("config: " + std::string(key) + " must be in [" + std::to_string(min) + ", " +
                             std::to_string(max) + "]");
  }
  return static_cast<T>(x);
}

std::filesystem::path path_field(const nlohmann::json& v, std::string_view key, const std::filesystem::path& base) {
  if (!v.is_string()) throw Error::bad_request("config: " + std::string(key) + " must be a string");
  std::filesystem::path p = v.get<std::string>();
  if (p.is_relative() && !base.empty()) p = base / p;
  return p;
}

}  // namespace

ServerConfig ServerConfig::from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir) {
  if (!doc.is_object()) throw Error::bad_request("config must be a JSON object");
  ServerConfig c;
  for (const auto& [key, v] : doc.items()) {
    if (key == "listen") {
      if (!v.is_string() || !parse_listen_address(v.get<std::string>())) {
        throw Error::bad_request("config: listen must be \"host:port\"");
      }
      c.listen = v.get<std::string>();
    } else if (key == "datasets_file") {
      c.datasets_file = path_field(v, key, base_dir);
    } else if (key == "users_file") {
      c.users_file = path_field(v, key, base_dir);
    } else if (key == "batch_size") {
      c.batch_size = unsigned_field<std::size_t>(v, key, 1, 1u << 24);
    } else if (key == "frame_cap") {
      c.frame_cap = unsigned_field<std::uint32_t>(v, key, 1024, wire::kDefaultFrameCap);
    } else if (key == "token_ttl_seconds") {
      c.token_ttl_seconds = unsigned_field<std::uint64_t>(v, key, 1, 365ull * 24 * 3600);
    } else {
      throw Error::bad_request("config: unknown key '" + key + "'");
    }
  }
  return c;
}

ServerConfig ServerConfig::load_file(const std::filesystem::path& file) {
  return from_json(read_json(file, "config file"), file.parent_path());
}

UserStore UserStore::from_json(const nlohmann::json& doc) {
  if (!doc.is_array()) throw Error::bad_request("users file must be a JSON array");
  UserStore store;
  for (const auto& u : doc) {
    if (!u.is_object() || !u.contains("username") || !u.contains("password_hash") || !u["username"].is_string() ||
        !u["password_hash"].is_string()) {
      throw Error::bad_request("user entries need string \"username\" and \"password_hash\"");
    }
    std::string name = u["username"].get<std::string>();
    if (name.empty()) throw Error::bad_request("empty username");
    if (store.users_.count(name)) throw Error::bad_request("duplicate user '" + name + "'");
    store.add(std::move(name), u["password_hash"].get<std::string>());
  }
  return store;
}

UserStore UserStore::load_file(const std::filesystem::path& file) { return from_json(read_json(file, "users file")); }

void UserStore::add(std::string username, std::string password_hash) {
  users_[std::move(username)] = std::move(password_hash);
}

bool UserStore::verify(std::string_view username, std::string_view password) const {
  auto it = users_.find(username);
  if (it == users_.end()) {
    // Hash anyway so unknown users are not trivially distinguishable.
    static const std::string dummy = crypto::hash_password("dummy", true);
    crypto::verify_password(password, dummy);
    return false;
  }
  return crypto::verify_password(password, it->second);
}

}  // namespace dacp::server
