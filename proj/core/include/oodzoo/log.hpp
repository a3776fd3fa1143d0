#pragma once

#include <string_view>

namespace oodzoo::log {

// Process-wide switch used by the CLI's --quiet flag.
void set_quiet(bool quiet) noexcept;
bool quiet() noexcept;

void warn(std::string_view message);
void info(std::string_view message);

}  // namespace oodzoo::log
