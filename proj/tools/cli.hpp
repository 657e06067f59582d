#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace wg::cli {

enum ExitCode { kPass = 0, kViolation = 1, kConfigError = 2 };

// Runs the command line (args[0] is the program name). Never throws.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace wg::cli
