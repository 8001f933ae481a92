#include "kspattern/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "kspattern/errors.hpp"

namespace kspattern {

namespace {

constexpr double blow_up_threshold = 1e6;

// Uniform double in [0, 1) from the top 53 bits; unlike
// std::uniform_real_distribution this is identical on every platform.
double unit_uniform(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

std::string format_time(double t) {
  std::ostringstream os;
  os << t;
  return os.str();
}

}  // namespace

void sim_config::validate() const {
  grid.validate();
  params.validate();
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw invalid_argument("dt must be positive");
  }
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) {
    throw invalid_argument("t_end must be non-negative");
  }
  for (double t : snapshot_times) {
    if (!(t >= 0.0 && t <= t_end)) {
      throw invalid_argument("snapshot time " + format_time(t) +
                             " outside [0, t_end]");
    }
  }
  for (const auto& pr : probes) {
    if (pr.i >= grid.ny || pr.j >= grid.nx) {
      throw invalid_argument("probe (" + std::to_string(pr.i) + "," +
                             std::to_string(pr.j) + ") outside the grid");
    }
  }
  if (probe_stride == 0 || mean_stride == 0) {
    throw invalid_argument("strides must be at least 1");
  }
  if (noise_amplitude < 0.0) {
    throw invalid_argument("noise amplitude must be non-negative");
  }
}

std::size_t sim_config::steps() const {
  return static_cast<std::size_t>(std::llround(t_end / dt));
}

double sim_config::positivity_budget() const noexcept {
  return positivity_budget_factor * static_cast<double>(grid.size());
}

std::string_view to_string(pattern_outcome outcome) noexcept {
  switch (outcome) {
    case pattern_outcome::homogeneous_high: return "HOMOGENEOUS_HIGH";
    case pattern_outcome::near_extinction: return "NEAR_EXTINCTION";
    case pattern_outcome::network: return "NETWORK";
    case pattern_outcome::degenerate_network: return "DEGENERATE_NETWORK";
    case pattern_outcome::spots: return "SPOTS";
  }
  return "NETWORK";
}

std::optional<pattern_outcome> outcome_from_string(std::string_view name) {
  for (auto o : {pattern_outcome::homogeneous_high,
                 pattern_outcome::near_extinction, pattern_outcome::network,
                 pattern_outcome::degenerate_network, pattern_outcome::spots}) {
    if (to_string(o) == name) return o;
  }
  return std::nullopt;
}

pattern_stats summarize(const scalar_field& u, double high_level) {
  pattern_stats s;
  const auto n = static_cast<double>(u.size());
  s.mean = u.mean();
  double var = 0.0;
  std::size_t high = 0, high_on_ring = 0;
  for (std::size_t i = 0; i < u.ny(); ++i) {
    for (std::size_t j = 0; j < u.nx(); ++j) {
      const double x = u(i, j);
      var += (x - s.mean) * (x - s.mean);
      if (x > high_level) {
        ++high;
        if (i == 0 || j == 0 || i + 1 == u.ny() || j + 1 == u.nx()) {
          ++high_on_ring;
        }
      }
    }
  }
  s.stddev = std::sqrt(var / n);
  s.high_fraction = static_cast<double>(high) / n;
  s.boundary_share =
      high == 0 ? 0.0
                : static_cast<double>(high_on_ring) / static_cast<double>(high);
  return s;
}

pattern_outcome classify_outcome(const sim_state& final_state,
                                 const outcome_thresholds& th) {
  const pattern_stats s = summarize(final_state.u, th.high_level);
  if (s.high_fraction >= th.homogeneous_fraction && s.stddev < th.flat_stddev) {
    return pattern_outcome::homogeneous_high;
  }
  if (s.high_fraction < th.empty_fraction) {
    return pattern_outcome::near_extinction;
  }
  if (s.high_fraction < th.sparse_fraction) {
    return s.boundary_share >= th.boundary_residue_share
               ? pattern_outcome::near_extinction
               : pattern_outcome::spots;
  }
  if (s.high_fraction < th.network_fraction) {
    return pattern_outcome::degenerate_network;
  }
  return pattern_outcome::network;
}

std::pair<scalar_field, scalar_field> initial_condition(
    const grid_spec& grid, std::uint64_t seed, double noise_amplitude) {
  grid.validate();
  if (grid.nx < 30 || grid.ny < 30) {
    throw invalid_argument("initial condition needs at least a 30x30 grid");
  }
  scalar_field u = scalar_field::constant(grid, 0.2);
  const std::size_t side = std::min(grid.nx, grid.ny) / 10;
  for (double fi : {0.25, 0.5, 0.75}) {
    for (double fj : {0.25, 0.5, 0.75}) {
      const auto ci = static_cast<std::size_t>(fi * static_cast<double>(grid.ny));
      const auto cj = static_cast<std::size_t>(fj * static_cast<double>(grid.nx));
      const std::size_t i0 = ci - side / 2, j0 = cj - side / 2;
      for (std::size_t i = i0; i < i0 + side; ++i) {
        for (std::size_t j = j0; j < j0 + side; ++j) u(i, j) = 0.8;
      }
    }
  }
  if (noise_amplitude > 0.0) {
    std::mt19937_64 gen(seed);
    for (std::size_t k = 0; k < u.size(); ++k) {
      u[k] += noise_amplitude * unit_uniform(gen);
    }
  }
  return {std::move(u), scalar_field::constant(grid, 0.5)};
}

std::pair<scalar_field, scalar_field> rhs(const sim_state& state,
                                          const model_params& p) {
  require_same_grid(state.u, state.v);
  if (!state.u.all_finite() || !state.v.all_finite()) {
    throw numerical_fault("rhs evaluated on a non-finite state");
  }
  const scalar_field lap_u = laplacian(state.u);
  const scalar_field lap_v = laplacian(state.v);
  scalar_field du = chemotaxis_term(state.u, state.v, p.b);
  scalar_field dv(state.u.spec());
  for (std::size_t k = 0; k < du.size(); ++k) {
    du[k] += reaction(state.u[k], p) + p.d_u * lap_u[k];
    dv[k] = p.c * state.u[k] - p.e * state.v[k] + p.d_v * lap_v[k];
  }
  return {std::move(du), std::move(dv)};
}

rk4_integrator::rk4_integrator(const grid_spec& grid, const model_params& p,
                               double dt, bool clip)
    : grid_(grid), p_(p), dt_(dt), clip_(clip) {
  grid_.validate();
  if (!(dt > 0.0)) throw invalid_argument("dt must be positive");
  const std::size_t nx = grid.nx, ny = grid.ny;
  up_.resize(ny);
  down_.resize(ny);
  gup_.resize(ny);
  gdown_.resize(ny);
  for (std::size_t i = 0; i < ny; ++i) {
    up_[i] = i == 0 ? 0 : i - 1;
    down_[i] = i + 1 == ny ? i : i + 1;
    gup_[i] = i == 0 ? 1 : i - 1;
    gdown_[i] = i + 1 == ny ? ny - 2 : i + 1;
  }
  left_.resize(nx);
  right_.resize(nx);
  gleft_.resize(nx);
  gright_.resize(nx);
  for (std::size_t j = 0; j < nx; ++j) {
    left_[j] = j == 0 ? 0 : j - 1;
    right_[j] = j + 1 == nx ? j : j + 1;
    gleft_[j] = j == 0 ? 1 : j - 1;
    gright_[j] = j + 1 == nx ? nx - 2 : j + 1;
  }
  const std::size_t n = grid.size();
  for (auto* buf : {&k1u_, &k1v_, &k2u_, &k2v_, &k3u_, &k3v_, &k4u_, &k4v_,
                    &tu_, &tv_}) {
    buf->assign(n, 0.0);
  }
}

// Fused evaluation of rhs(); must stay term-for-term equal to the
// field-operator composition (checked in the simulator tests).
void rk4_integrator::eval(std::span<const double> u,
                          std::span<const double> v, std::span<double> du,
                          std::span<double> dv) const {
  const std::size_t nx = grid_.nx, ny = grid_.ny;
  const double inv_h2 = 1.0 / (grid_.h * grid_.h);
  const double inv_2h = 0.5 / grid_.h;
  const double a = p_.a, b = p_.b, c = p_.c, e = p_.e, g = p_.gamma;
  const double d_u = p_.d_u, d_v = p_.d_v;
  for (std::size_t i = 0; i < ny; ++i) {
    const double* row = u.data() + i * nx;
    const double* row_up = u.data() + up_[i] * nx;
    const double* row_dn = u.data() + down_[i] * nx;
    const double* grow_up = u.data() + gup_[i] * nx;
    const double* grow_dn = u.data() + gdown_[i] * nx;
    const double* vrow = v.data() + i * nx;
    const double* vrow_up = v.data() + up_[i] * nx;
    const double* vrow_dn = v.data() + down_[i] * nx;
    const double* gvrow_up = v.data() + gup_[i] * nx;
    const double* gvrow_dn = v.data() + gdown_[i] * nx;
    double* out_u = du.data() + i * nx;
    double* out_v = dv.data() + i * nx;
    for (std::size_t j = 0; j < nx; ++j) {
      const double uc = row[j];
      const double vc = vrow[j];
      const double lap_u =
          (row_up[j] + row_dn[j] + row[left_[j]] + row[right_[j]] - 4.0 * uc) *
          inv_h2;
      const double lap_v = (vrow_up[j] + vrow_dn[j] + vrow[left_[j]] +
                            vrow[right_[j]] - 4.0 * vc) *
                           inv_h2;
      const double ux = (row[gright_[j]] - row[gleft_[j]]) * inv_2h;
      const double uy = (grow_dn[j] - grow_up[j]) * inv_2h;
      const double vx = (vrow[gright_[j]] - vrow[gleft_[j]]) * inv_2h;
      const double vy = (gvrow_dn[j] - gvrow_up[j]) * inv_2h;
      const double chemo = -b * ((ux * vx + uy * vy) + uc * lap_v);
      out_u[j] = chemo + a * uc * (1.0 - uc) * (uc - g) + d_u * lap_u;
      out_v[j] = c * uc - e * vc + d_v * lap_v;
    }
  }
}

double rk4_integrator::step(sim_state& state) {
  const std::span<double> u = state.u.values();
  const std::span<double> v = state.v.values();
  const std::size_t n = u.size();
  if (n != grid_.size() || v.size() != n) {
    throw dimension_error("state does not match the integrator grid");
  }
  const double dt = dt_, half = 0.5 * dt_;

  eval(u, v, k1u_, k1v_);
  for (std::size_t k = 0; k < n; ++k) {
    tu_[k] = u[k] + half * k1u_[k];
    tv_[k] = v[k] + half * k1v_[k];
  }
  eval(tu_, tv_, k2u_, k2v_);
  for (std::size_t k = 0; k < n; ++k) {
    tu_[k] = u[k] + half * k2u_[k];
    tv_[k] = v[k] + half * k2v_[k];
  }
  eval(tu_, tv_, k3u_, k3v_);
  for (std::size_t k = 0; k < n; ++k) {
    tu_[k] = u[k] + dt * k3u_[k];
    tv_[k] = v[k] + dt * k3v_[k];
  }
  eval(tu_, tv_, k4u_, k4v_);

  const double w = dt / 6.0;
  const double t_next = state.t + dt;
  double clipped = 0.0;
  bool bad = false;
  for (std::size_t k = 0; k < n; ++k) {
    double un = u[k] + w * (k1u_[k] + 2.0 * k2u_[k] + 2.0 * k3u_[k] + k4u_[k]);
    double vn = v[k] + w * (k1v_[k] + 2.0 * k2v_[k] + 2.0 * k3v_[k] + k4v_[k]);
    bad |= !(std::abs(un) <= blow_up_threshold) ||
           !(std::abs(vn) <= blow_up_threshold);
    if (clip_) {
      if (un < 0.0) {
        clipped -= un;
        un = 0.0;
      }
      if (vn < 0.0) {
        clipped -= vn;
        vn = 0.0;
      }
    }
    u[k] = un;
    v[k] = vn;
  }
  state.t = t_next;
  if (bad) {
    throw instability_fault(
        "explicit scheme blew up at t = " + format_time(t_next) +
            " (|value| > 1e6 or non-finite); reduce dt",
        t_next);
  }
  return clipped * grid_.h * grid_.h;
}

sim_state rk4_step(const sim_state& state, const model_params& p, double dt,
                   bool clip, step_report* report) {
  require_same_grid(state.u, state.v);
  rk4_integrator integrator(state.u.spec(), p, dt, clip);
  sim_state next = state;
  const double clipped = integrator.step(next);
  if (report != nullptr) report->clipped_mass += clipped;
  return next;
}

point_diagnostics diagnose_point(const scalar_field& u, const scalar_field& v,
                                 const probe& at) {
  require_same_grid(u, v);
  const auto& s = u.spec();
  const std::size_t i = at.i, j = at.j;
  if (i >= s.ny || j >= s.nx) throw invalid_argument("probe outside the grid");
  const std::size_t up = i == 0 ? 0 : i - 1;
  const std::size_t dn = i + 1 == s.ny ? i : i + 1;
  const std::size_t lf = j == 0 ? 0 : j - 1;
  const std::size_t rt = j + 1 == s.nx ? j : j + 1;
  const std::size_t gup = i == 0 ? 1 : i - 1;
  const std::size_t gdn = i + 1 == s.ny ? s.ny - 2 : i + 1;
  const std::size_t glf = j == 0 ? 1 : j - 1;
  const std::size_t grt = j + 1 == s.nx ? s.nx - 2 : j + 1;
  const double inv_h2 = 1.0 / (s.h * s.h);
  const double inv_2h = 0.5 / s.h;
  point_diagnostics d;
  d.lap_u = (u(up, j) + u(dn, j) + u(i, lf) + u(i, rt) - 4.0 * u(i, j)) * inv_h2;
  d.lap_v = (v(up, j) + v(dn, j) + v(i, lf) + v(i, rt) - 4.0 * v(i, j)) * inv_h2;
  const double ux = (u(i, grt) - u(i, glf)) * inv_2h;
  const double uy = (u(gdn, j) - u(gup, j)) * inv_2h;
  const double vx = (v(i, grt) - v(i, glf)) * inv_2h;
  const double vy = (v(gdn, j) - v(gup, j)) * inv_2h;
  d.gradu_dot_gradv = ux * vx + uy * vy;
  return d;
}

sim_run run(const sim_config& config) {
  config.validate();
  auto [u, v] =
      initial_condition(config.grid, config.seed, config.noise_amplitude);
  return run_from(config, sim_state{0.0, std::move(u), std::move(v)});
}

sim_run run_from(const sim_config& config, sim_state initial) {
  config.validate();
  require_same_grid(initial.u, initial.v);
  if (!(initial.u.spec() == config.grid)) {
    throw dimension_error("initial state does not match the configured grid");
  }
  sim_run out;
  out.config = config;
  const std::size_t steps = config.steps();
  out.steps = steps;

  // Requested snapshot times snap to the nearest step; keep them sorted.
  std::vector<std::pair<std::size_t, std::size_t>> snap_steps;  // (step, slot)
  {
    std::vector<double> times = config.snapshot_times;
    std::sort(times.begin(), times.end());
    for (std::size_t s = 0; s < times.size(); ++s) {
      auto n = static_cast<std::size_t>(std::llround(times[s] / config.dt));
      snap_steps.emplace_back(std::min(n, steps), s);
    }
  }
  out.snapshots.reserve(snap_steps.size());

  for (const auto& pr : config.probes) {
    probe_series ps;
    ps.position = pr;
    const std::size_t samples = steps / config.probe_stride + 1;
    for (auto* vec : {&ps.t, &ps.u, &ps.v, &ps.lap_u, &ps.lap_v,
                      &ps.gradu_dot_gradv}) {
      vec->reserve(samples);
    }
    out.probes.push_back(std::move(ps));
  }

  sim_state state = std::move(initial);
  state.t = 0.0;
  std::size_t next_snap = 0;
  const double budget = config.positivity_budget();

  auto record = [&](std::size_t n) {
    while (next_snap < snap_steps.size() && snap_steps[next_snap].first == n) {
      out.snapshots.push_back(state);
      ++next_snap;
    }
    if (n % config.probe_stride == 0 || n == steps) {
      for (auto& ps : out.probes) {
        const auto d = diagnose_point(state.u, state.v, ps.position);
        ps.t.push_back(state.t);
        ps.u.push_back(state.u(ps.position.i, ps.position.j));
        ps.v.push_back(state.v(ps.position.i, ps.position.j));
        ps.lap_u.push_back(d.lap_u);
        ps.lap_v.push_back(d.lap_v);
        ps.gradu_dot_gradv.push_back(d.gradu_dot_gradv);
      }
    }
    if (n % config.mean_stride == 0 || n == steps) {
      const auto m = mean_values(state.u, state.v);
      out.means.t.push_back(state.t);
      out.means.ubar.push_back(m.ubar);
      out.means.vbar.push_back(m.vbar);
    }
  };

  rk4_integrator integrator(config.grid, config.params, config.dt,
                            config.positivity_clip);
  record(0);
  for (std::size_t n = 1; n <= steps; ++n) {
    out.clipped_mass += integrator.step(state);
    // Time from the step count, so long runs do not accumulate drift.
    state.t = static_cast<double>(n) * config.dt;
    if (config.enforce_positivity_budget && out.clipped_mass > budget) {
      throw positivity_fault("clamped negative mass " +
                                 format_time(out.clipped_mass) +
                                 " exceeds the budget " + format_time(budget) +
                                 " at t = " + format_time(state.t),
                             state.t, out.clipped_mass);
    }
    record(n);
  }

  out.within_positivity_budget = out.clipped_mass <= budget;
  out.stats = summarize(state.u);
  out.outcome = classify_outcome(state);
  out.final_state = std::move(state);
  return out;
}

std::vector<sweep_row> sweep_gamma(const std::vector<double>& gammas,
                                   const sim_config& base) {
  for (double g : gammas) {
    if (!(g > 0.0 && g < 1.0)) {
      throw invalid_argument("gamma " + format_time(g) + " outside (0, 1)");
    }
  }
  std::vector<sweep_row> rows;
  rows.reserve(gammas.size());
  for (double g : gammas) {
    sweep_row row;
    row.gamma = g;
    sim_config cfg = base;
    cfg.params.gamma = g;
    try {
      const sim_run r = run(cfg);
      row.outcome = r.outcome;
      row.stats = r.stats;
      row.clipped_mass = r.clipped_mass;
      row.within_positivity_budget = r.within_positivity_budget;
    } catch (const error& ex) {
      row.error = ex.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace kspattern
