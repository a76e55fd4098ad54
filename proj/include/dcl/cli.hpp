// cli.hpp -- batch command-line front end
#pragma once

#include <string>
#include <vector>

namespace dcl {

// Runs one command (args exclude the program name) and returns the process
// exit status: 0 on success (`sup`: yes), 1 for `sup`: no, 2 with a
// diagnostic on standard error for malformed inputs, alphabet mismatches,
// inputs outside the bounded form, or exhausted budgets.
int run_cli(std::vector<std::string> args);

} // namespace dcl
