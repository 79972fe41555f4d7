// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <json.hpp>
#include <string_view>

namespace dacp::log {

enum class Level { Debug = 0, Info = 1, Warn = 2, Error = 3, Off = 4 };

void set_level(Level level);
Level level();

/// Writes one JSON object per line to stderr: {"ts","level","event",...fields}.
void emit(Level level, std::string_view event, nlohmann::json fields = nlohmann::json::object());

inline void debug(std::string_view e, nlohmann::json f = nlohmann::json::object()) { emit(Level::Debug, e, std::move(f)); }
inline void info(std::string_view e, nlohmann::json f = nlohmann::json::object()) { emit(Level::Info, e, std::move(f)); }
inline void warn(std::string_view e, nlohmann::json f = nlohmann::json::object()) { emit(Level::Warn, e, std::move(f)); }
inline void error(std::string_view e, nlohmann::json f = nlohmann::json::object()) { emit(Level::Error, e, std::move(f)); }

}  // namespace dacp::log
