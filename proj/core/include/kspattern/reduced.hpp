#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kspattern/kinetics.hpp"

namespace kspattern {

/// Two coupled nodes (u1, v1) and (u2, v2):
///   u1' = f(u1) - b u1 (v2 - v1) + d_u (u2 - u1)
///   v1' = c u1 - e v1 + d_v (v2 - v1)
/// and the same with the indices swapped.
struct reduced_state {
  double u1 = 0.0;
  double v1 = 0.0;
  double u2 = 0.0;
  double v2 = 0.0;

  std::array<double, 4> as_array() const noexcept { return {u1, v1, u2, v2}; }
  static reduced_state from_array(const std::array<double, 4>& a) noexcept {
    return {a[0], a[1], a[2], a[3]};
  }
  /// Node exchange (u1, v1, u2, v2) -> (u2, v2, u1, v1).
  reduced_state swapped() const noexcept { return {u2, v2, u1, v1}; }
  double distance(const reduced_state& o) const noexcept;

  friend bool operator==(const reduced_state&, const reduced_state&) = default;
};

reduced_state reduced_rhs(const reduced_state& s, const model_params& p) noexcept;

using matrix4 = std::array<std::array<double, 4>, 4>;

/// Analytic Jacobian of reduced_rhs, rows/columns ordered (u1, v1, u2, v2).
matrix4 jacobian(const reduced_state& s, const model_params& p) noexcept;

/// Coefficients of the linear relation v = alpha1 u_self + alpha2 u_other
/// that holds at rest. alpha1 + alpha2 = c / e.
struct alpha_coeffs {
  double alpha1 = 0.0;
  double alpha2 = 0.0;
};

/// Throws invalid_argument unless d_v > 0 and e > 0.
alpha_coeffs compute_alpha(const model_params& p);

/// u_pole = d_u / (b (alpha1 - alpha2)), where phi is undefined.
double phi_pole(const model_params& p, const alpha_coeffs& al);

/// phi(u) = u + f(u) / (b u (alpha1 - alpha2) - d_u); at rest u2 = phi(u1)
/// and u1 = phi(u2). Throws pole_fault when the denominator is below 1e-12.
double phi(double u, const model_params& p, const alpha_coeffs& al);

enum class reduced_stability { stable, unstable, marginal };

std::string_view to_string(reduced_stability s) noexcept;

struct stability_report {
  std::array<double, 4> eigen_real_parts{};
  reduced_stability stability = reduced_stability::marginal;
  /// Real parts of both signs (saddle type).
  bool mixed_signs = false;
};

/// Eigenvalue real parts of the Jacobian; any within 1e-8 of zero gives
/// marginal, otherwise all negative is stable and any positive unstable.
stability_report classify_stability(const reduced_state& s,
                                    const model_params& p);

struct stationary_point {
  reduced_state state;
  std::array<double, 4> eigen_real_parts{};
  reduced_stability stability = reduced_stability::marginal;
  bool mixed_signs = false;
  /// U1*..U9* naming (empty if the point does not fit the scheme).
  std::string label;
  double residual = 0.0;
};

struct stationary_search {
  double lo = -0.1;
  double hi = 1.6;
  std::size_t samples = 5000;
  double pole_radius = 1e-6;
  double bisection_tol = 1e-12;
  double residual_tol = 1e-8;
};

/// Rest states from sign changes of g(u) = phi(phi(u)) - u, bisected and
/// lifted to four components; candidates with |rhs| > residual_tol are
/// rejected. Points are sorted by (u1, u2) and labeled:
/// U1* = 0, U2* = gamma, U3* = 1 on the diagonal; asymmetric stable pair
/// U8*/U9*; asymmetric unstable pairs U4*/U5* then U6*/U7* by increasing
/// max(u1, u2). Within a pair the even label has u1 > u2.
std::vector<stationary_point> find_stationary(const model_params& p,
                                              const stationary_search& opts = {});

struct scan_row {
  double b = 0.0;
  std::size_t count = 0;
  std::size_t stable_count = 0;
  std::string error;
};

std::vector<scan_row> bifurcation_scan(const std::vector<double>& b_values,
                                       const model_params& base,
                                       const stationary_search& opts = {});

struct reduced_trajectory {
  std::vector<double> t;
  std::vector<reduced_state> states;
};

/// RK4 trajectory of round(t_end / dt) steps, initial state included.
/// `stride` thins the stored samples. Throws instability_fault on blow-up.
reduced_trajectory integrate(const reduced_state& s0, const model_params& p,
                             double dt, double t_end, std::size_t stride = 1);

struct orbit {
  std::string name;
  reduced_state start;
  reduced_trajectory trajectory;
  /// Label of the stationary point reached, if within the tolerance.
  std::optional<std::string> endpoint;
  double endpoint_distance = 0.0;
};

struct orbit_options {
  double magnitude = 1e-4;
  double dt = 1e-3;
  double t_end = 200.0;
  double endpoint_tol = 1e-4;
  std::size_t stride = 100;
};

/// Three orbits leaving U2* = (gamma, c gamma / e, gamma, c gamma / e):
/// "symmetric-minus" (both u lowered), "symmetric-plus" (both raised) and
/// "asymmetric" (u1 raised, u2 lowered). Each endpoint is matched against
/// find_stationary at the same parameters. Throws invalid_argument if U2*
/// is not unstable.
std::vector<orbit> heteroclinic_orbits(const model_params& p,
                                       const orbit_options& opts = {});

}  // namespace kspattern
