#pragma once

// Command line entry point: fit / sample / eval / attack subcommands.
// Returns 0 on success, 2 on configuration or usage errors, 1 on runtime
// failures.

namespace gantab {

int cli_main(int argc, char** argv);

}  // namespace gantab
