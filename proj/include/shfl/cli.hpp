#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace shfl {

enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 2,
    kExitAssertion = 3,
    kExitIo = 4,
};

/// Entry point of the `shfl` tool; returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace shfl
