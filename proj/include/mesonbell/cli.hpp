#pragma once

#include <iosfwd>
#include <string>

namespace mesonbell::cli {

/// Exit codes: 0 success, 1 computation or I/O failure, 2 usage error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Runs one subcommand (threshold, scan, maximize, verdict, simulate). Primary
/// output goes to `out` unless --output names a file; diagnostics go to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Shortest decimal form of `value` rounded to 9 significant digits.
std::string format_number(double value);

}  // namespace mesonbell::cli
