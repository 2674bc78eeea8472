#pragma once

#include <string>
#include <vector>

namespace amsearch {

// Full command-line entry point. Returns the process exit code:
//   0 success, 1 usage or data problem, 2 upstream model failure.
int run_cli(int argc, const char* const* argv);

// Same, for in-process tests; `args` excludes the program name.
int run_cli(const std::vector<std::string>& args);

} // namespace amsearch
