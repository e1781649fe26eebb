#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace locbeta {

/// Exit codes of run_cli.
enum ExitCode : int {
    exit_ok = 0,
    exit_usage = 1,
    exit_data = 2,
    exit_numerical = 3,
};

/// Runs one command line (without the program name). Regular output goes to
/// `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace locbeta
