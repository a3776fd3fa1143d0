#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "oodzoo/error.hpp"

namespace oodzoo::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

/// Exit code for a library error: 1 for bad input/config, 2 for runtime failures.
int exit_code_for(Errc code) noexcept;

/// Runs the command line (args excludes the program name). Never throws.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace oodzoo::cli
