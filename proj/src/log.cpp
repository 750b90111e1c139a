#include "memloop/log.hpp"

#include <atomic>
#include <cstdio>
#include <mutex>

namespace memloop {

namespace {

std::atomic<LogLevel> g_level{LogLevel::warn};
std::mutex g_mutex;

const char* level_tag(LogLevel level) {
    switch (level) {
    case LogLevel::debug: return "debug";
    case LogLevel::info: return "info";
    case LogLevel::warn: return "warn";
    case LogLevel::error: return "error";
    default: return "?";
    }
}

} // namespace

void set_log_level(LogLevel level) { g_level.store(level); }

LogLevel log_level() { return g_level.load(); }

void log_line(LogLevel level, const std::string& message) {
    if (level < g_level.load()) {
        return;
    }
    std::lock_guard<std::mutex> lock(g_mutex);
    std::fprintf(stderr, "[memloop:%s] %s\n", level_tag(level), message.c_str());
}

} // namespace memloop
