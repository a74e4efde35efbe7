#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bayessum {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

/// Entry point of the command-line tool; `args` starts with the program name
/// as in argv. Returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bayessum
