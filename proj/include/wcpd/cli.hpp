#pragma once

#include <ostream>

namespace wcpd::cli {

enum ExitCode : int {
    kSuccess = 0,
    kUsageError = 1,
    kDataError = 2,
    kInternalError = 3,
};

/// Entry point of the `wcpd` tool. Messages go to `out`, diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace wcpd::cli
