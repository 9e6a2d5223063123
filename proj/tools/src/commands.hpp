#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace smoothreg::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitVerificationFailed = 1,
  kExitUsage = 2,
  kExitInternal = 3,
};

// Runs one `smoothreg` invocation; `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace smoothreg::cli
