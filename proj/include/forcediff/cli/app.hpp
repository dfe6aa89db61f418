#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace forcediff::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitOther = 1,
  kExitUsage = 2,
  kExitData = 3,
  kExitIo = 4,
};

// Parses `args` (without the program name), runs the subcommand and maps
// errors onto exit codes. Messages go to `err`.
int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace forcediff::cli
