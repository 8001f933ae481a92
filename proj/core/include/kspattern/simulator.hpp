#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kspattern/grid.hpp"
#include "kspattern/kinetics.hpp"

namespace kspattern {

/// Grid position, row i (y) and column j (x).
struct probe {
  std::size_t i = 0;
  std::size_t j = 0;
  friend bool operator==(const probe&, const probe&) = default;
};

struct sim_config {
  grid_spec grid{100, 100, 1.0};
  model_params params{};
  double dt = 1e-3;
  double t_end = 180.0;
  std::uint64_t seed = 42;
  std::vector<double> snapshot_times;
  std::vector<probe> probes;
  bool positivity_clip = true;
  /// Amplitude of the uniform noise added to the initial u; 0 disables it.
  double noise_amplitude = 0.2;
  std::size_t probe_stride = 1;
  std::size_t mean_stride = 1;
  /// Clamped mass allowed per run is budget_factor * nx * ny. The run
  /// always reports whether it stayed within budget; with
  /// enforce_positivity_budget it aborts with positivity_fault instead.
  double positivity_budget_factor = 1e-6;
  bool enforce_positivity_budget = false;

  /// Throws invalid_argument on any inconsistent setting.
  void validate() const;
  std::size_t steps() const;
  double positivity_budget() const noexcept;
};

struct sim_state {
  double t = 0.0;
  scalar_field u;
  scalar_field v;
};

struct probe_series {
  probe position;
  std::vector<double> t, u, v, lap_u, lap_v, gradu_dot_gradv;

  std::size_t size() const noexcept { return t.size(); }
};

struct mean_series {
  std::vector<double> t, ubar, vbar;
};

enum class pattern_outcome {
  homogeneous_high,
  near_extinction,
  network,
  degenerate_network,
  spots,
};

std::string_view to_string(pattern_outcome outcome) noexcept;
std::optional<pattern_outcome> outcome_from_string(std::string_view name);

/// Summary statistics of a density field used for regime labeling.
struct pattern_stats {
  double mean = 0.0;
  double stddev = 0.0;
  /// Fraction of grid points with u > high_level.
  double high_fraction = 0.0;
  /// Share of the high points that sit on the outermost ring of the grid.
  double boundary_share = 0.0;
};

struct outcome_thresholds {
  double high_level = 0.7;
  /// homogeneous_high needs high_fraction >= this and stddev < flat_stddev.
  double homogeneous_fraction = 0.95;
  double flat_stddev = 0.05;
  /// Below this high_fraction the pattern is extinction or spots.
  double sparse_fraction = 0.05;
  /// Between sparse_fraction and this value the network is degenerate.
  double network_fraction = 0.12;
  /// A sparse high set mostly on the boundary ring counts as extinction.
  double boundary_residue_share = 0.5;
  /// Fewer high points than this fraction is plain extinction.
  double empty_fraction = 0.005;
};

pattern_stats summarize(const scalar_field& u, double high_level = 0.7);

pattern_outcome classify_outcome(const sim_state& final_state,
                                 const outcome_thresholds& th = {});

struct sim_run {
  sim_config config;
  std::vector<sim_state> snapshots;
  std::vector<probe_series> probes;
  mean_series means;
  sim_state final_state;
  pattern_outcome outcome = pattern_outcome::network;
  pattern_stats stats;
  double clipped_mass = 0.0;
  bool within_positivity_budget = true;
  std::size_t steps = 0;
};

/// u = 0.2 background with nine 0.8 squares in a 3x3 layout (side
/// floor(min(nx, ny) / 10), centers at 1/4, 1/2, 3/4 of each axis) plus
/// i.i.d. uniform noise in [0, noise_amplitude]; v = 0.5. Requires at least
/// a 30x30 grid.
std::pair<scalar_field, scalar_field> initial_condition(
    const grid_spec& grid, std::uint64_t seed, double noise_amplitude = 0.2);

/// du = f(u) - b (grad u . grad v + u lap v) + d_u lap u,
/// dv = c u - e v + d_v lap v.
std::pair<scalar_field, scalar_field> rhs(const sim_state& state,
                                          const model_params& p);

struct step_report {
  double clipped_mass = 0.0;
};

/// Classical RK4 update of (u, v). With `clip`, negative entries are set to
/// zero afterwards and their mass is added to `report`. Throws
/// instability_fault when any value is non-finite or exceeds 1e6.
sim_state rk4_step(const sim_state& state, const model_params& p, double dt,
                   bool clip = true, step_report* report = nullptr);

/// Allocation-free RK4 stepper for long runs.
class rk4_integrator {
 public:
  rk4_integrator(const grid_spec& grid, const model_params& p, double dt,
                 bool clip);

  /// Advances `state` in place by one step and returns the mass clamped in
  /// this step.
  double step(sim_state& state);

 private:
  void eval(std::span<const double> u, std::span<const double> v,
            std::span<double> du, std::span<double> dv) const;

  grid_spec grid_;
  model_params p_;
  double dt_;
  bool clip_;
  std::vector<std::size_t> up_, down_, left_, right_;      // zero-flux ghosts
  std::vector<std::size_t> gup_, gdown_, gleft_, gright_;  // mirrored ghosts
  std::vector<double> k1u_, k1v_, k2u_, k2v_, k3u_, k3v_, k4u_, k4v_, tu_, tv_;
};

/// Laplacians and gradient product at one grid point, using the same
/// stencils as the field operators.
struct point_diagnostics {
  double lap_u = 0.0;
  double lap_v = 0.0;
  double gradu_dot_gradv = 0.0;
};
point_diagnostics diagnose_point(const scalar_field& u, const scalar_field& v,
                                 const probe& at);

/// Integrates to t_end recording snapshots (nearest step to each requested
/// time), probe series, the mean series and the final regime label.
sim_run run(const sim_config& config);

/// Same as run() but starting from a caller-supplied state at t = 0.
sim_run run_from(const sim_config& config, sim_state initial);

struct sweep_row {
  double gamma = 0.0;
  std::optional<pattern_outcome> outcome;
  pattern_stats stats;
  double clipped_mass = 0.0;
  bool within_positivity_budget = true;
  std::string error;
};

/// One run per gamma sharing the base configuration and seed. Throws
/// invalid_argument if any gamma is outside (0, 1); a run that faults is
/// recorded with its message and the sweep continues.
std::vector<sweep_row> sweep_gamma(const std::vector<double>& gammas,
                                   const sim_config& base);

}  // namespace kspattern
