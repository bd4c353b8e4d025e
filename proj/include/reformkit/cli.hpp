#pragma once

#include <iosfwd>

namespace reformkit {

enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 1,
    kExitData = 2,
    kExitBackend = 3,
};

// Entry point of the `reformkit` tool. Results go to `out` (or --out),
// diagnostics to `err` as one JSON object per line.
int run_cli(int argc, char const* const* argv, std::ostream& out, std::ostream& err);

}  // namespace reformkit
