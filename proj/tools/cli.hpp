#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace monoreg::cli {

enum ExitCode : int { kSuccess = 0, kRuntimeFailure = 1, kUsageError = 2 };

/** Runs the command line `args` (without the program name).
 *
 * Subcommands: fit, test, simulate, calibrate, generate. Results go to the --out path or, when
 * none is given, to `out`; diagnostics go to `err`. Returns one of ExitCode.
 */
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace monoreg::cli
