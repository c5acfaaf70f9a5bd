#pragma once

#include <string>
#include <vector>

namespace icm {

/// exit_code: 0 success or definite verdict, 2 unknown / undecided, 1 usage
/// or input error. payload goes to stdout, diagnostics to stderr.
struct CommandOutcome {
  int exit_code = 0;
  std::string payload;
  std::string diagnostics;
};

/// Dispatches one `icm` invocation. args excludes the program name.
CommandOutcome run_command(const std::vector<std::string>& args);

}  // namespace icm
