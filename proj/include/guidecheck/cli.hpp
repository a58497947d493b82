#pragma once

#include <iosfwd>

namespace guidecheck::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitInput = 2;
inline constexpr int kExitCompile = 3;
inline constexpr int kExitResource = 4;
inline constexpr int kExitAllDeadEnds = 5;

/// Parses arguments, runs one subcommand (preprocess, check, convert,
/// dotted-chart, simulate) and returns the process exit code. Human-readable
/// progress goes to `out`, diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace guidecheck::cli
