#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace supou {

inline constexpr int kExitOk = 0;
inline constexpr int kExitComputation = 1;
inline constexpr int kExitConfig = 2;

/// Entry point of the supou command-line tool. args excludes the program
/// name. Returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace supou
