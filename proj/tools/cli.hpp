#pragma once

#include <iosfwd>

namespace pqpcp::cli {

enum ExitCode : int {
    kOk = 0,
    kUsageError = 1,
    kNumericFailure = 2,
};

/// Entry point of the `pqpcp` tool. Subcommands: decompose, denoise, bench.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace pqpcp::cli
