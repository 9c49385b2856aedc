#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace omni::cli {

enum ExitCode : int {
    kSuccess = 0,
    kUsageError = 2,
    kIoError = 3,
    kValidationError = 4,
};

/// Runs the omniview command line. args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace omni::cli
