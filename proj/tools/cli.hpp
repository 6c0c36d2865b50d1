#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cqed::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitEmptyBranch = 3;
inline constexpr int kExitInfeasible = 4;

/// Runs the command line (without the program name). Tables go to `out`
/// unless --out is given; diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cqed::cli
