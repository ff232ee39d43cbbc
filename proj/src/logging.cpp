#include "sfofr/logging.hpp"

#include <cstdio>
#include <cstdlib>
#include <mutex>
#include <optional>
#include <string>

namespace sfofr::log {

namespace {

std::mutex g_mutex;
std::optional<Level> g_level;

Level parse_env() {
    const char* env = std::getenv("SFOFR_LOG");
    if (!env) return Level::warn;
    std::string s(env);
    if (s == "debug") return Level::debug;
    if (s == "info") return Level::info;
    if (s == "warn") return Level::warn;
    if (s == "error") return Level::error;
    if (s == "off") return Level::off;
    return Level::warn;
}

const char* tag(Level lvl) {
    switch (lvl) {
        case Level::debug: return "debug";
        case Level::info: return "info";
        case Level::warn: return "warn";
        case Level::error: return "error";
        default: return "?";
    }
}

}  // namespace

void set_level(Level lvl) {
    std::lock_guard lock(g_mutex);
    g_level = lvl;
}

Level level() {
    std::lock_guard lock(g_mutex);
    if (!g_level) g_level = parse_env();
    return *g_level;
}

void emit(Level lvl, const std::string& msg) {
    if (static_cast<int>(lvl) < static_cast<int>(level())) return;
    std::lock_guard lock(g_mutex);
    std::fprintf(stderr, "[sfofr %s] %s\n", tag(lvl), msg.c_str());
}

}  // namespace sfofr::log
