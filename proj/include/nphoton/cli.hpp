#pragma once

// The nphoton command line: spectrum, gn, gtau, g2map, ladder, validate.

#include <ostream>
#include <string>
#include <vector>

namespace nphoton {

enum ExitCode : int {
    kExitOk = 0,
    kExitInvalid = 1,
    kExitComputation = 2,
    kExitCheckFailed = 3,
};

/// Runs one command. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nphoton
