#pragma once

#include <iosfwd>

namespace tubevol::cli {

enum ExitCode : int { kSuccess = 0, kBoundFailure = 1, kUsageError = 2 };

/// Entry point shared by the executable and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tubevol::cli
