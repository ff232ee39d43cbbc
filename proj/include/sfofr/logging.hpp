#pragma once

#include <string>

namespace sfofr::log {

enum class Level { debug = 0, info = 1, warn = 2, error = 3, off = 4 };

// Threshold is read from SFOFR_LOG ("debug", "info", "warn", "error", "off")
// the first time a message is emitted; defaults to warn.
void set_level(Level lvl);
Level level();

void emit(Level lvl, const std::string& msg);

inline void debug(const std::string& msg) { emit(Level::debug, msg); }
inline void info(const std::string& msg) { emit(Level::info, msg); }
inline void warn(const std::string& msg) { emit(Level::warn, msg); }
inline void error(const std::string& msg) { emit(Level::error, msg); }

}  // namespace sfofr::log
