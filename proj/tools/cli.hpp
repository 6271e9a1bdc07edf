#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fkbs::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitConfig = 2,
  kExitData = 3,
};

/// Runs one command line (argv[0] is the program name) and returns the exit
/// code. Normal output goes to `out`, diagnostics and alerts to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fkbs::cli
