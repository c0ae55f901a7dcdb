#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace preimage::cli {

/// Stable process exit codes.
enum ExitCode : int { kOk = 0, kFailure = 1, kUsage = 2, kNumerical = 3 };

/// Entry point of `preimage-forge <kernel|train|maximize|invert|evaluate> [flags]`.
/// args[0] is the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace preimage::cli
