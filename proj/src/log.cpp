#include "kansa/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace kansa {

namespace {
std::atomic<int> g_level{static_cast<int>(Verbosity::warn)};
std::mutex g_mutex;

void emit(std::string_view tag, std::string_view message) {
  std::lock_guard lock(g_mutex);
  std::cerr << "[" << tag << "] " << message << '\n';
}
}  // namespace

void set_verbosity(Verbosity level) { g_level.store(static_cast<int>(level)); }

Verbosity verbosity() { return static_cast<Verbosity>(g_level.load()); }

void log_warn(std::string_view message) {
  if (g_level.load() >= static_cast<int>(Verbosity::warn)) emit("warn", message);
}

void log_info(std::string_view message) {
  if (g_level.load() >= static_cast<int>(Verbosity::info)) emit("info", message);
}

}  // namespace kansa
