#pragma once

#include <ostream>

namespace meanrisk::cli {

/// Exit codes of the command-line front end.
enum ExitCode : int { kOk = 0, kConfigError = 2, kModelError = 3, kGateFailure = 4 };

/// Runs one invocation. JSON payloads go to `out`, diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace meanrisk::cli
