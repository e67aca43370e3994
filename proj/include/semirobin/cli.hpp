#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace semirobin {

/// Exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitVerdict = 1, kExitUsage = 2 };

/// Runs one subcommand (spectrum, check-f, solve, verify). `args` excludes
/// the program name.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int dispatch(int argc, const char* const* argv);

}  // namespace semirobin
