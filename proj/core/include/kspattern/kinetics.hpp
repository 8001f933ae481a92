#pragma once

#include <array>
#include <string_view>
#include <vector>

#include "kspattern/grid.hpp"

namespace kspattern {

/// Coefficients of the chemotaxis system
///   u_t = f(u) - b div(u grad v) + d_u lap u,   f(u) = a u (1 - u)(u - gamma)
///   v_t = c u - e v + d_v lap v.
/// Defaults are the reference pattern-forming set.
struct model_params {
  double a = 7.0;
  double b = 10.0;
  double c = 3.0;
  double e = 2.0;
  double d_u = 1.0;
  double d_v = 10.0;
  double gamma = 0.25;

  /// Throws invalid_argument unless a, c, e > 0, d_u, d_v >= 0 and
  /// 0 < gamma < 1.
  void validate() const;

  static model_params with_gamma(double gamma) {
    model_params p;
    p.gamma = gamma;
    return p;
  }

  friend bool operator==(const model_params&, const model_params&) = default;
};

struct ode_state {
  double u = 0.0;
  double v = 0.0;
};

/// f(u) = a u (1 - u)(u - gamma).
double reaction(double u, const model_params& p) noexcept;

/// f'(u).
double reaction_derivative(double u, const model_params& p) noexcept;

/// Right-hand side of the space-free system u' = f(u), v' = c u - e v.
ode_state ode_rhs(const ode_state& s, const model_params& p) noexcept;

/// One classical RK4 step of the space-free system.
ode_state ode_step(const ode_state& s, const model_params& p, double dt);

/// RK4 trajectory from s0 over round(t_end / dt) steps, s0 included.
/// Throws integration_fault on a non-finite state.
std::vector<ode_state> ode_integrate(const ode_state& s0, const model_params& p,
                                     double dt, double t_end);

enum class equilibrium_kind { stable_node, saddle, unstable_node, degenerate };

std::string_view to_string(equilibrium_kind kind) noexcept;

struct equilibrium {
  ode_state state;
  std::array<double, 2> eigenvalues{};
  equilibrium_kind kind = equilibrium_kind::degenerate;
};

/// The three homogeneous rest states (0, 0), (gamma, c gamma / e) and
/// (1, c / e), each labeled from the eigenvalues f'(u*) and -e of the
/// triangular Jacobian.
std::vector<equilibrium> classify_equilibria(const model_params& p);

struct mean_pair {
  double ubar = 0.0;
  double vbar = 0.0;
};

/// Rectangle-rule integrals over the domain: grid sums scaled by h^2.
mean_pair mean_values(const scalar_field& u, const scalar_field& v);

}  // namespace kspattern
