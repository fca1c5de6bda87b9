#pragma once

namespace surfcorr {

// Dispatches argv to a subcommand. Returns the process exit code: 0 on
// success, 1 on a domain error (reported to err), 2 on a usage error.
int run_cli(int argc, const char* const* argv);

}  // namespace surfcorr
