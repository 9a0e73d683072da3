#pragma once

#include <iosfwd>

namespace orsynth {

// Exit codes shared by every subcommand.
enum ExitCode : int {
    kExitOk = 0,
    kExitCheckFailed = 1,  // validate: at least one checker failed
    kExitUsage = 2,        // bad flags or configuration
    kExitInput = 3,        // unreadable or invalid input files
    kExitNoOptimum = 4,    // solve: infeasible, unbounded or node limit
};

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace orsynth
