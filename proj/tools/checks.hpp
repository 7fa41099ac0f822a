#pragma once

#include <iosfwd>

namespace rwald::tools {

// Quick self-test of the library invariants; returns the process exit code.
int run_checks(std::ostream& out);

}  // namespace rwald::tools
