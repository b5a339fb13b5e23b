#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace panelmed::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kNumericalError = 3 };

/// Runs one command line. `args` excludes the program name. Reports go to
/// `out` (or files under --out); diagnostics to `err`, one line each.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace panelmed::cli
