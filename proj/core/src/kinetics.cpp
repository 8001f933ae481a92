#include "kspattern/kinetics.hpp"

#include <cmath>
#include <string>

#include "kspattern/errors.hpp"

namespace kspattern {

void model_params::validate() const {
  auto finite = [](double x) { return std::isfinite(x); };
  if (!(finite(a) && finite(b) && finite(c) && finite(e) && finite(d_u) &&
        finite(d_v) && finite(gamma))) {
    throw invalid_argument("model parameters must be finite");
  }
  if (!(a > 0.0)) throw invalid_argument("a must be positive");
  if (!(c > 0.0)) throw invalid_argument("c must be positive");
  if (!(e > 0.0)) throw invalid_argument("e must be positive");
  if (d_u < 0.0 || d_v < 0.0) {
    throw invalid_argument("diffusivities must be non-negative");
  }
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw invalid_argument("gamma must lie in (0, 1), got " +
                           std::to_string(gamma));
  }
}

double reaction(double u, const model_params& p) noexcept {
  return p.a * u * (1.0 - u) * (u - p.gamma);
}

double reaction_derivative(double u, const model_params& p) noexcept {
  // d/du [a (-u^3 + (1 + gamma) u^2 - gamma u)]
  return p.a * (-3.0 * u * u + 2.0 * (1.0 + p.gamma) * u - p.gamma);
}

ode_state ode_rhs(const ode_state& s, const model_params& p) noexcept {
  return {reaction(s.u, p), p.c * s.u - p.e * s.v};
}

ode_state ode_step(const ode_state& s, const model_params& p, double dt) {
  const ode_state k1 = ode_rhs(s, p);
  const ode_state k2 =
      ode_rhs({s.u + 0.5 * dt * k1.u, s.v + 0.5 * dt * k1.v}, p);
  const ode_state k3 =
      ode_rhs({s.u + 0.5 * dt * k2.u, s.v + 0.5 * dt * k2.v}, p);
  const ode_state k4 = ode_rhs({s.u + dt * k3.u, s.v + dt * k3.v}, p);
  return {s.u + dt / 6.0 * (k1.u + 2.0 * k2.u + 2.0 * k3.u + k4.u),
          s.v + dt / 6.0 * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v)};
}

std::vector<ode_state> ode_integrate(const ode_state& s0, const model_params& p,
                                     double dt, double t_end) {
  if (!(dt > 0.0)) throw invalid_argument("dt must be positive");
  if (t_end < 0.0) throw invalid_argument("t_end must be non-negative");
  const auto steps = static_cast<std::size_t>(std::llround(t_end / dt));
  std::vector<ode_state> traj;
  traj.reserve(steps + 1);
  traj.push_back(s0);
  ode_state s = s0;
  for (std::size_t n = 0; n < steps; ++n) {
    s = ode_step(s, p, dt);
    if (!std::isfinite(s.u) || !std::isfinite(s.v)) {
      throw integration_fault("non-finite ODE state at t = " +
                              std::to_string(static_cast<double>(n + 1) * dt));
    }
    traj.push_back(s);
  }
  return traj;
}

std::string_view to_string(equilibrium_kind kind) noexcept {
  switch (kind) {
    case equilibrium_kind::stable_node: return "stable-node";
    case equilibrium_kind::saddle: return "saddle";
    case equilibrium_kind::unstable_node: return "unstable-node";
    case equilibrium_kind::degenerate: return "degenerate";
  }
  return "degenerate";
}

namespace {

equilibrium_kind kind_from(double l1, double l2) {
  if (l1 == 0.0 || l2 == 0.0) return equilibrium_kind::degenerate;
  if (l1 < 0.0 && l2 < 0.0) return equilibrium_kind::stable_node;
  if (l1 > 0.0 && l2 > 0.0) return equilibrium_kind::unstable_node;
  return equilibrium_kind::saddle;
}

}  // namespace

std::vector<equilibrium> classify_equilibria(const model_params& p) {
  p.validate();
  std::vector<equilibrium> out;
  for (double u : {0.0, p.gamma, 1.0}) {
    equilibrium eq;
    eq.state = {u, p.c * u / p.e};
    // Jacobian [[f'(u), 0], [c, -e]] is lower triangular.
    eq.eigenvalues = {reaction_derivative(u, p), -p.e};
    eq.kind = kind_from(eq.eigenvalues[0], eq.eigenvalues[1]);
    out.push_back(eq);
  }
  return out;
}

mean_pair mean_values(const scalar_field& u, const scalar_field& v) {
  require_same_grid(u, v);
  const double area = u.spec().h * u.spec().h;
  return {u.sum() * area, v.sum() * area};
}

}  // namespace kspattern
