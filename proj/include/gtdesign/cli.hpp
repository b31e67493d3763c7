#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace gtdesign::cli {

/// Process exit codes. Stable across releases.
enum ExitCode : int {
  kSuccess = 0,
  kNotCertified = 1,  ///< `verify` ran but the design failed the optimality check
  kUsage = 2,
  kSolver = 3,
  kIo = 4,
};

/// Runs the command line `args` (args[0] is the program name) and returns the exit code.
/// Documents go to `out` unless --out is given; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gtdesign::cli
