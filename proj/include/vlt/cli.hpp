#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace vlt::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitInternal = 3;

/// Runs one subcommand. `args` excludes the program name. Data goes to
/// files or `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace vlt::cli
