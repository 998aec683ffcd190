// hyda/cli.hpp — command-line front end. Subcommands: generate, train, suite,
// ablation, grid, plotdata. Exit codes: 0 success, 1 run error, 2 config
// error. Precedence for settings: flags over config file over defaults.
#pragma once

#include <string>
#include <vector>

namespace hyda {

// Returns the process exit code. Warnings (e.g. flags that do not apply to
// the chosen strategy) go to err; normal output to out.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hyda
