#include "uavq/log.hpp"

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string>

namespace uavq {

namespace {

LogLevel from_env() {
  const char *value = std::getenv("UAVQ_LOG");
  if (!value) return LogLevel::Warn;
  const std::string text(value);
  if (text == "error") return LogLevel::Error;
  if (text == "info") return LogLevel::Info;
  if (text == "debug") return LogLevel::Debug;
  return LogLevel::Warn;
}

std::atomic<int> &level_slot() {
  static std::atomic<int> level{static_cast<int>(from_env())};
  return level;
}

constexpr const char *kNames[] = {"error", "warn", "info", "debug"};

} // namespace

LogLevel log_level() { return static_cast<LogLevel>(level_slot().load()); }

void set_log_level(LogLevel level) { level_slot().store(static_cast<int>(level)); }

void log_message(LogLevel level, std::string_view message) {
  if (static_cast<int>(level) > level_slot().load()) return;
  static std::mutex mutex;
  std::lock_guard lock(mutex);
  std::cerr << "[uavq " << kNames[static_cast<int>(level)] << "] " << message << '\n';
}

} // namespace uavq
