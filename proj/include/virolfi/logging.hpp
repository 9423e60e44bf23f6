#pragma once

#include <string_view>

namespace virolfi::log {

enum class Level { Quiet = 0, Warn = 1, Info = 2, Debug = 3 };

/// Threshold read once from VIROLFI_VERBOSE (0-3, default 1).
Level threshold();
void set_threshold(Level level);

void warn(std::string_view message);
void info(std::string_view message);
void debug(std::string_view message);

}  // namespace virolfi::log
