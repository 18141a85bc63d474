#pragma once

#include <ostream>

namespace dclust::cli {

// Entry point of the dclust tool. Failures are reported as one JSON line
// {"error": kind, "message": ...} on err; the return value is the exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Exit codes by error family.
inline constexpr int kExitConfig = 2;
inline constexpr int kExitBlowup = 3;
inline constexpr int kExitIo = 4;
inline constexpr int kExitNonConvergence = 5;

}  // namespace dclust::cli
