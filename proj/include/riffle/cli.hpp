#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace riffle::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitPropertyFailure = 1;
inline constexpr int kExitUsage = 2;

/// Runs the command line (args excludes the program name). Output goes to
/// --out if given, else to `out`; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace riffle::cli
