#pragma once

#include <ostream>

namespace nmla::tools {

// Entry point of the `nmla` command line. Returns the process exit status:
// 0 on success, 1 when `verify` finds a failing suite, 2 on usage or runtime
// errors (reported on `err`).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace nmla::tools
