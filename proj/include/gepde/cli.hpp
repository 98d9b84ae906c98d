#ifndef GEPDE_CLI_HPP
#define GEPDE_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "gepde/evolve.hpp"

namespace gepde::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kUsage = 2, kAboveTarget = 3 };

// Entry point shared by the executable and the tests. `args` excludes the
// program name. Subcommands: run (default), verify, export, map.
int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Shortest text that reads back to the same double ("nan", "inf" for
// non-finite values).
std::string format_real(double value);

}  // namespace gepde::cli

#endif  // GEPDE_CLI_HPP
