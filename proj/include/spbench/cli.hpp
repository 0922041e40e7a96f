#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace spbench {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitParse = 1,
  kExitNoSolutions = 2,
  kExitVerifyFailed = 3,
};

/// Runs one `spbench` invocation; `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace spbench
