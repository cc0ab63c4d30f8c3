#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace greedyopt::cli {

/// Runs one command line (without the program name). Returns the process
/// exit code: 0 success, 1 numerical failure, 2 usage or input error.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace greedyopt::cli
