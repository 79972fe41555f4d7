// SPDX-License-Identifier: Apache-2.0
#include "dacp/util/log.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <mutex>
#include <string>

namespace dacp::log {
namespace {

Level initial_level() {
  const char* env = std::getenv("DACP_LOG");
  if (env == nullptr) return Level::Info;
  std::string v(env);
  if (v == "debug") return Level::Debug;
  if (v == "info") return Level::Info;
  if (v == "warn") return Level::Warn;
  if (v == "error") return Level::Error;
  if (v == "off") return Level::Off;
  return Level::Info;
}

std::atomic<Level> g_level{initial_level()};
std::mutex g_mu;

const char* level_name(Level l) {
  switch (l) {
    case Level::Debug: return "debug";
    case Level::Info: return "info";
    case Level::Warn: return "warn";
    case Level::Error: return "error";
    case Level::Off: return "off";
  }
  return "?";
}

}  // namespace

void set_level(Level level) { g_level.store(level); }
Level level() { return g_level.load(); }

void emit(Level lvl, std::string_view event, nlohmann::json fields) {
  if (lvl < g_level.load()) return;
  auto now = std::chrono::system_clock::now().time_since_epoch();
  nlohmann::json line = {
      {"ts", std::chrono::duration_cast<std::chrono::milliseconds>(now).count() / 1000.0},
      {"level", level_name(lvl)},
      {"event", event},
  };
  if (fields.is_object()) {
    for (auto& [k, v] : fields.items()) line[k] = v;
  }
  std::string text = line.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
  std::lock_guard lock(g_mu);
  std::fprintf(stderr, "%s\n", text.c_str());
}

}  // namespace dacp::log
