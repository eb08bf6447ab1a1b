#pragma once

#include <string>
#include <vector>

namespace tkgc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitDiverged = 2;

// Runs one command line (argv[0] is the program name) and returns the exit code.
int run(const std::vector<std::string>& args);

}  // namespace tkgc::cli
