#pragma once

namespace fringe::cli {

// Parses argv, runs the selected subcommand and returns the process exit code:
// 0 success, 1 validation or configuration error, 2 I/O error, 3 numeric failure.
int run(int argc, char** argv);

}  // namespace fringe::cli
