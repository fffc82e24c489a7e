#pragma once

#include <string>
#include <vector>

namespace kpad {

/// Entry point of the `kpad` command line. Returns the process exit code:
/// 0 success, 1 I/O error, 2 invalid input or configuration, 3 solver non-convergence.
int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args);  // args[0] is the program name

}  // namespace kpad
