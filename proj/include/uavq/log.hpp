#pragma once

// Minimal leveled logging to stderr. The level is read once from the
// UAVQ_LOG environment variable: error, warn (default), info or debug.

#include <string_view>

namespace uavq {

enum class LogLevel { Error = 0, Warn = 1, Info = 2, Debug = 3 };

LogLevel log_level();
/// Overrides the environment for the rest of the process (used by tests).
void set_log_level(LogLevel level);

void log_message(LogLevel level, std::string_view message);
inline void log_warn(std::string_view m) { log_message(LogLevel::Warn, m); }
inline void log_info(std::string_view m) { log_message(LogLevel::Info, m); }
inline void log_debug(std::string_view m) { log_message(LogLevel::Debug, m); }

} // namespace uavq
