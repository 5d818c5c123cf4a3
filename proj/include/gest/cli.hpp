#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gest {

inline constexpr const char* kToolVersion = "0.1.0";

/// Exit codes of the `gest` tool.
enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 1,       // bad arguments, config, unreadable or malformed input
    kExitValidation = 2,  // input failed validation and --force was not given
    kExitLlm = 3,         // completion failed after retries; proto-language is still written
};

/// Entry point of the `gest` command line. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gest
