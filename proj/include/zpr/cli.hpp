#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace zpr {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitValidation = 2,
  kExitNumericCheck = 3,
};

// Entry point of the `zpr` tool. Subcommands: gen-toy, train, eval, oracle,
// sweep, seed-study.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Same, with the arguments after the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace zpr
