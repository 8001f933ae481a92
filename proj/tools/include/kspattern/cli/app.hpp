#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "kspattern/cli/selftest.hpp"

namespace kspattern::cli {

enum exit_status : int {
  exit_ok = 0,
  exit_runtime_fault = 1,
  exit_usage_error = 2,
};

/// Entry point of the `kspattern` tool. `args` excludes the program name.
/// Returns the process exit status; nothing is written to std::cout or
/// std::cerr directly.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err, const selftest_hooks& hooks = {});

}  // namespace kspattern::cli
