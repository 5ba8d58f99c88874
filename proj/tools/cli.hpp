#pragma once

#include <iosfwd>

namespace a3dmm::cli {

/// Exit codes: 0 success, 1 runtime failure, 2 usage error.
int run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err);

}  // namespace a3dmm::cli
