#pragma once

#include <string>
#include <vector>

namespace radloc::cli {

// Runs one command line (args[0] is the program name); returns the exit code.
// Errors are reported on stderr.
int run(const std::vector<std::string>& args);

}  // namespace radloc::cli
