#pragma once

#include <iosfwd>

namespace invclass::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kInput = 3, kNoConvergence = 4 };

// Entry point shared by the executable and the tests.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace invclass::cli
