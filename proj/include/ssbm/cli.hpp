#pragma once

namespace ssbm {

/// Process exit codes of the command-line tool.
enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1,
    kExitBadArguments = 2,
    kExitParseFailure = 3,
    kExitInfeasible = 4,
};

/// Entry point of the `ssbm` tool; argv[0] is the program name.
int run_cli(int argc, const char* const* argv);

}  // namespace ssbm
