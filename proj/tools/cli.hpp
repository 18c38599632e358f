#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace mrcp::cli {

/// Runs one command line (args exclude the program name) and returns the exit code:
/// 0 success, 1 configuration error, 2 data error, 3 numeric failure.
/// Errors print a single line `error kind=<kind> code=<n> message="<text>"` to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mrcp::cli
