#pragma once

#include <iosfwd>

namespace dsom {

enum ExitCode : int {
    exit_ok = 0,
    exit_usage = 1,
    exit_io = 2,
    exit_validation = 3,
    exit_internal = 4,
};

/// Entry point of the dsom command line tool. argv[0] is the program name.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dsom
