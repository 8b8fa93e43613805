#pragma once

#include <string>
#include <vector>

namespace aptshield::cli {

// Dispatches one CLI invocation (argv without the program name) and returns
// the process exit code: 0 success, 1 usage/config error, 2 data error,
// 3 numeric failure.
int run_command(const std::vector<std::string>& args);

}  // namespace aptshield::cli
