#pragma once

#include <string>

namespace memloop {

enum class LogLevel { debug = 0, info = 1, warn = 2, error = 3, silent = 4 };

void set_log_level(LogLevel level);
LogLevel log_level();

void log_line(LogLevel level, const std::string& message);

inline void log_debug(const std::string& message) { log_line(LogLevel::debug, message); }
inline void log_info(const std::string& message) { log_line(LogLevel::info, message); }
inline void log_warn(const std::string& message) { log_line(LogLevel::warn, message); }
inline void log_error(const std::string& message) { log_line(LogLevel::error, message); }

} // namespace memloop
