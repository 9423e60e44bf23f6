#include "virolfi/logging.hpp"

#include <cstdlib>
#include <iostream>
#include <optional>

namespace virolfi::log {
namespace {

std::optional<Level>& override_level() {
  static std::optional<Level> level;
  return level;
}

Level from_env() {
  const char* env = std::getenv("VIROLFI_VERBOSE");
  if (env == nullptr) return Level::Warn;
  int v = std::atoi(env);
  if (v <= 0) return Level::Quiet;
  if (v >= 3) return Level::Debug;
  return static_cast<Level>(v);
}

void emit(Level level, const char* tag, std::string_view message) {
  if (static_cast<int>(level) > static_cast<int>(threshold())) return;
  std::cerr << "[virolfi " << tag << "] " << message << '\n';
}

}  // namespace

Level threshold() {
  if (override_level()) return *override_level();
  static const Level env_level = from_env();
  return env_level;
}

void set_threshold(Level level) { override_level() = level; }

void warn(std::string_view message) { emit(Level::Warn, "warn", message); }
void info(std::string_view message) { emit(Level::Info, "info", message); }
void debug(std::string_view message) { emit(Level::Debug, "debug", message); }

}  // namespace virolfi::log
