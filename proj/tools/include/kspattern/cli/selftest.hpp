#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "kspattern/grid.hpp"

namespace kspattern::cli {

/// Replacement points for the kernels under test, so a deliberately broken
/// stencil can be shown to trip its invariant.
struct selftest_hooks {
  std::function<scalar_field(const scalar_field&)> laplacian;
};

struct check_result {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Runs the oracle-equivalence checks: stencils against dense matrices,
/// GMRES against dense elimination, and the elliptic inversion on a
/// manufactured solution.
std::vector<check_result> run_selftest(const selftest_hooks& hooks = {},
                                       std::uint64_t seed = 42);

}  // namespace kspattern::cli
