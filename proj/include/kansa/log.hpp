#pragma once

#include <string_view>

namespace kansa {

enum class Verbosity { quiet = 0, warn = 1, info = 2, debug = 3 };

void set_verbosity(Verbosity level);
Verbosity verbosity();

// Messages go to stderr when the current verbosity admits them.
void log_warn(std::string_view message);
void log_info(std::string_view message);

}  // namespace kansa
