#pragma once

// Diagnostic stream on stderr, verbosity from MC_CAPACITY_LOG:
// 0/quiet, 1/warn (default), 2/info, 3/debug.

#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string>
#include <string_view>

namespace mcisi::log {

enum class Level { quiet = 0, warn = 1, info = 2, debug = 3 };

inline Level parse_level(const char* text) {
  if (text == nullptr) return Level::warn;
  const std::string_view v(text);
  if (v == "0" || v == "quiet") return Level::quiet;
  if (v == "2" || v == "info") return Level::info;
  if (v == "3" || v == "debug") return Level::debug;
  return Level::warn;
}

inline Level level() {
  static const Level lvl = parse_level(std::getenv("MC_CAPACITY_LOG"));
  return lvl;
}

inline void write(Level at, std::string_view tag, const std::string& msg) {
  if (static_cast<int>(level()) < static_cast<int>(at)) return;
  static std::mutex m;
  std::lock_guard lock(m);
  std::cerr << "[" << tag << "] " << msg << '\n';
}

inline void warn(const std::string& msg) { write(Level::warn, "warn", msg); }
inline void info(const std::string& msg) { write(Level::info, "info", msg); }
inline void debug(const std::string& msg) { write(Level::debug, "debug", msg); }

}  // namespace mcisi::log
