#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace xbarscale {

enum ExitCode : int { exit_ok = 0, exit_failure = 1, exit_input = 2, exit_model = 3 };

// Entry point of the xbar-scale tool; `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace xbarscale
