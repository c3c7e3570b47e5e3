#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace polygate {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitInput = 2,
  kExitInternal = 3,
};

/// Runs one `polygate` invocation. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace polygate
