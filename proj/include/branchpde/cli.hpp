#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace branchpde::cli {

enum ExitCode : int { ok = 0, failure = 1, validation_error = 2, budget_error = 3 };

/// Entry point of the `branchpde` executable. Reports go to --out (or the
/// config's output path) and otherwise to `out`; diagnostics go to `err`.
int run_command(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Names accepted by `branchpde table`.
std::vector<std::string> table_names();

}  // namespace branchpde::cli
