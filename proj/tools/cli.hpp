#pragma once

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace quest::cli {

/// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitCheckFailed = 4;

/// Runs the command line (args excludes the program name). Results go to
/// `out` unless --out names a file; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// JSON schema that eval and invert output conforms to.
std::string_view output_schema();

}  // namespace quest::cli
