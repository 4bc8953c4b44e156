#pragma once

#include <iosfwd>
#include <span>
#include <string>

namespace colordet::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

/// Runs one subcommand. `args` excludes the program name. Returns 0 on
/// success, 1 for invalid arguments (usage printed to `err`), 2 for runtime
/// or data errors.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace colordet::cli
