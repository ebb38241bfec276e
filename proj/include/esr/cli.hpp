#pragma once

#include <string>
#include <vector>

namespace esr {

// Entry point behind the esr binary; exposed so tests can drive the CLI
// in-process. args excludes the program name. Returns the process exit code.
int run_cli(const std::vector<std::string>& args);

}  // namespace esr
