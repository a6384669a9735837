#pragma once

#include <iosfwd>

namespace gcsg::cli {

enum ExitCode : int {
    kOk = 0,
    kUsage = 2,
    kIo = 3,
    kFormat = 4,
    kInvariant = 5,
};

/// Entry point shared by the gcsg binary and the CLI tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gcsg::cli
