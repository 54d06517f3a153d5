#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace logprox::cli {

enum ExitCode : int { kOk = 0, kRuntimeFailure = 1, kValidation = 2 };

/// Entry point of the `logprox` tool. args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace logprox::cli
