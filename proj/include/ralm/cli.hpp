#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ralm::cli {

enum ExitCode : int {
  kOk = 0,
  kLoadError = 1,
  kInfeasibleStationary = 2,
  kSolverFailure = 3,
  kTraceMismatch = 4,
  kInfeasiblePoint = 5,
  kUsage = 64,
};

/// Runs one command. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ralm::cli
