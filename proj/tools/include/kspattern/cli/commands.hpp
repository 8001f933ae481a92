#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "kspattern/cli/selftest.hpp"
#include "kspattern/reconstruct.hpp"
#include "kspattern/reduced.hpp"
#include "kspattern/simulator.hpp"

namespace kspattern::cli {

struct run_context {
  std::string command_line;
  std::filesystem::path out_dir;
  std::ostream& out;
  std::ostream& err;
};

/// Each command returns an exit status and throws for usage problems
/// (invalid_argument) or unrecoverable faults.
int cmd_simulate(const sim_config& config, const run_context& ctx);
int cmd_sweep(const std::vector<double>& gammas, const sim_config& base,
              const run_context& ctx);

struct reconstruct_settings {
  /// Frame files in order, or a single directory whose PNG/PGM files are
  /// taken in file-name order.
  std::vector<std::filesystem::path> inputs;
  grid_spec grid;
  model_params params;
  reconstruct_options options;
};
int cmd_reconstruct(const reconstruct_settings& s, const run_context& ctx);

int cmd_reduced_stationary(const model_params& p, const run_context& ctx);
int cmd_reduced_scan(const model_params& base, double b_from, double b_to,
                     std::size_t steps, const run_context& ctx);
int cmd_reduced_orbits(const model_params& p, const orbit_options& opts,
                       const run_context& ctx);

int cmd_selftest(const selftest_hooks& hooks, std::uint64_t seed,
                 const run_context& ctx);

/// Frame files of a reconstruct invocation, directories expanded.
std::vector<std::filesystem::path> collect_frames(
    const std::vector<std::filesystem::path>& inputs);

}  // namespace kspattern::cli
