#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ndf4d {

/// Exit status of run_cli.
enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2 };

/// Runs one subcommand: synth, train, mesh, slice, segment or eval.
/// `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv);

}  // namespace ndf4d
