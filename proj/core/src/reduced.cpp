#include "kspattern/reduced.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "kspattern/errors.hpp"

namespace kspattern {

double reduced_state::distance(const reduced_state& o) const noexcept {
  return std::sqrt((u1 - o.u1) * (u1 - o.u1) + (v1 - o.v1) * (v1 - o.v1) +
                   (u2 - o.u2) * (u2 - o.u2) + (v2 - o.v2) * (v2 - o.v2));
}

reduced_state reduced_rhs(const reduced_state& s, const model_params& p) noexcept {
  return {
      reaction(s.u1, p) - p.b * s.u1 * (s.v2 - s.v1) + p.d_u * (s.u2 - s.u1),
      p.c * s.u1 - p.e * s.v1 + p.d_v * (s.v2 - s.v1),
      reaction(s.u2, p) - p.b * s.u2 * (s.v1 - s.v2) + p.d_u * (s.u1 - s.u2),
      p.c * s.u2 - p.e * s.v2 + p.d_v * (s.v1 - s.v2),
  };
}

matrix4 jacobian(const reduced_state& s, const model_params& p) noexcept {
  matrix4 j{};
  j[0] = {reaction_derivative(s.u1, p) - p.b * (s.v2 - s.v1) - p.d_u,
          p.b * s.u1, p.d_u, -p.b * s.u1};
  j[1] = {p.c, -p.e - p.d_v, 0.0, p.d_v};
  j[2] = {p.d_u, -p.b * s.u2,
          reaction_derivative(s.u2, p) - p.b * (s.v1 - s.v2) - p.d_u,
          p.b * s.u2};
  j[3] = {0.0, p.d_v, p.c, -p.e - p.d_v};
  return j;
}

alpha_coeffs compute_alpha(const model_params& p) {
  if (!(p.d_v > 0.0)) throw invalid_argument("alpha coefficients need d_v > 0");
  if (!(p.e > 0.0)) throw invalid_argument("alpha coefficients need e > 0");
  const double s = p.d_v + p.e;
  const double det = p.e * (2.0 * p.d_v + p.e);  // s^2 - d_v^2 without cancellation
  return {p.c * s / det, p.c * p.d_v / det};
}

double phi_pole(const model_params& p, const alpha_coeffs& al) {
  return p.d_u / (p.b * (al.alpha1 - al.alpha2));
}

double phi(double u, const model_params& p, const alpha_coeffs& al) {
  const double den = p.b * u * (al.alpha1 - al.alpha2) - p.d_u;
  if (std::abs(den) < 1e-12) {
    std::ostringstream os;
    os << "phi evaluated at its pole u = " << u;
    throw pole_fault(os.str());
  }
  return u + reaction(u, p) / den;
}

std::string_view to_string(reduced_stability s) noexcept {
  switch (s) {
    case reduced_stability::stable: return "STABLE";
    case reduced_stability::unstable: return "UNSTABLE";
    case reduced_stability::marginal: return "MARGINAL";
  }
  return "MARGINAL";
}

stability_report classify_stability(const reduced_state& s,
                                    const model_params& p) {
  const matrix4 j = jacobian(s, p);
  Eigen::Matrix4d m;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) m(r, c) = j[r][c];
  }
  const Eigen::EigenSolver<Eigen::Matrix4d> solver(m, false);
  if (solver.info() != Eigen::Success) {
    throw numerical_fault("eigenvalue iteration did not converge");
  }
  stability_report rep;
  bool any_pos = false, any_neg = false, any_zero = false;
  for (int k = 0; k < 4; ++k) {
    const double re = solver.eigenvalues()[k].real();
    rep.eigen_real_parts[static_cast<std::size_t>(k)] = re;
    if (std::abs(re) <= 1e-8) {
      any_zero = true;
    } else if (re > 0.0) {
      any_pos = true;
    } else {
      any_neg = true;
    }
  }
  std::sort(rep.eigen_real_parts.begin(), rep.eigen_real_parts.end());
  rep.mixed_signs = any_pos && any_neg;
  if (any_zero) {
    rep.stability = reduced_stability::marginal;
  } else {
    rep.stability = any_pos ? reduced_stability::unstable : reduced_stability::stable;
  }
  return rep;
}

namespace {

double residual_norm(const reduced_state& s, const model_params& p) {
  const auto r = reduced_rhs(s, p).as_array();
  return std::sqrt(r[0] * r[0] + r[1] * r[1] + r[2] * r[2] + r[3] * r[3]);
}

void assign_labels(std::vector<stationary_point>& pts, const model_params& p) {
  constexpr double diag_tol = 1e-7;
  std::vector<stationary_point*> stable_pairs, unstable_pairs;
  for (auto& sp : pts) {
    const auto& s = sp.state;
    if (std::abs(s.u1 - s.u2) <= diag_tol) {
      if (std::abs(s.u1) <= diag_tol) sp.label = "U1*";
      else if (std::abs(s.u1 - p.gamma) <= diag_tol) sp.label = "U2*";
      else if (std::abs(s.u1 - 1.0) <= diag_tol) sp.label = "U3*";
      continue;
    }
    if (s.u1 > s.u2) {  // one representative per swap pair
      (sp.stability == reduced_stability::stable ? stable_pairs : unstable_pairs)
          .push_back(&sp);
    }
  }
  auto partner = [&](const stationary_point& sp) -> stationary_point* {
    for (auto& q : pts) {
      if (q.state.distance(sp.state.swapped()) <= 1e-6) return &q;
    }
    return nullptr;
  };
  auto by_reach = [](const stationary_point* a, const stationary_point* b) {
    return std::max(a->state.u1, a->state.u2) < std::max(b->state.u1, b->state.u2);
  };
  std::sort(unstable_pairs.begin(), unstable_pairs.end(), by_reach);
  std::sort(stable_pairs.begin(), stable_pairs.end(), by_reach);
  int next = 4;
  for (auto* sp : unstable_pairs) {
    if (next > 6) break;
    sp->label = "U" + std::to_string(next) + "*";
    if (auto* q = partner(*sp)) q->label = "U" + std::to_string(next + 1) + "*";
    next += 2;
  }
  if (!stable_pairs.empty()) {
    stable_pairs.front()->label = "U8*";
    if (auto* q = partner(*stable_pairs.front())) q->label = "U9*";
  }
}

}  // namespace

std::vector<stationary_point> find_stationary(const model_params& p,
                                              const stationary_search& opts) {
  if (opts.samples < 1000) {
    throw invalid_argument("stationary search needs at least 1000 samples");
  }
  if (!(opts.hi > opts.lo)) throw invalid_argument("empty search interval");
  const alpha_coeffs al = compute_alpha(p);
  const double pole = phi_pole(p, al);

  // g(u) = phi(phi(u)) - u; nullopt inside a pole neighborhood of either
  // phi evaluation.
  auto g = [&](double u) -> std::optional<double> {
    if (std::abs(u - pole) <= opts.pole_radius) return std::nullopt;
    try {
      const double w = phi(u, p, al);
      if (!std::isfinite(w) || std::abs(w - pole) <= opts.pole_radius) {
        return std::nullopt;
      }
      const double r = phi(w, p, al) - u;
      if (!std::isfinite(r)) return std::nullopt;
      return r;
    } catch (const pole_fault&) {
      return std::nullopt;
    }
  };

  std::vector<double> roots;
  const double step = (opts.hi - opts.lo) / static_cast<double>(opts.samples);
  std::optional<double> prev = g(opts.lo);
  double prev_u = opts.lo;
  for (std::size_t k = 1; k <= opts.samples; ++k) {
    const double u = opts.lo + static_cast<double>(k) * step;
    const std::optional<double> cur = g(u);
    if (prev && cur) {
      if (*prev == 0.0) {
        roots.push_back(prev_u);
      } else if (*prev * *cur < 0.0) {
        double a = prev_u, b = u, ga = *prev;
        bool ok = true;
        while (b - a > opts.bisection_tol) {
          const double m = 0.5 * (a + b);
          const auto gm = g(m);
          if (!gm) {
            ok = false;
            break;
          }
          if ((*gm < 0.0) == (ga < 0.0)) {
            a = m;
            ga = *gm;
          } else {
            b = m;
          }
        }
        if (ok) roots.push_back(0.5 * (a + b));
      }
    }
    prev = cur;
    prev_u = u;
  }
  if (prev && *prev == 0.0) roots.push_back(prev_u);

  std::vector<stationary_point> out;
  for (double u1 : roots) {
    stationary_point sp;
    double u2 = 0.0;
    try {
      u2 = phi(u1, p, al);
    } catch (const pole_fault&) {
      continue;
    }
    sp.state = {u1, al.alpha1 * u1 + al.alpha2 * u2, u2,
                al.alpha1 * u2 + al.alpha2 * u1};
    sp.residual = residual_norm(sp.state, p);
    // Sign changes across the pole of phi o phi are not roots.
    if (!(sp.residual <= opts.residual_tol)) continue;
    const bool dup = std::any_of(out.begin(), out.end(), [&](const auto& q) {
      return q.state.distance(sp.state) <= 1e-7;
    });
    if (dup) continue;
    const stability_report rep = classify_stability(sp.state, p);
    sp.eigen_real_parts = rep.eigen_real_parts;
    sp.stability = rep.stability;
    sp.mixed_signs = rep.mixed_signs;
    out.push_back(sp);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.state.u1 != b.state.u1 ? a.state.u1 < b.state.u1
                                    : a.state.u2 < b.state.u2;
  });
  assign_labels(out, p);
  return out;
}

std::vector<scan_row> bifurcation_scan(const std::vector<double>& b_values,
                                       const model_params& base,
                                       const stationary_search& opts) {
  std::vector<scan_row> rows;
  for (double b : b_values) {
    scan_row row;
    row.b = b;
    model_params p = base;
    p.b = b;
    try {
      const auto pts = find_stationary(p, opts);
      row.count = pts.size();
      row.stable_count = static_cast<std::size_t>(
          std::count_if(pts.begin(), pts.end(), [](const auto& sp) {
            return sp.stability == reduced_stability::stable;
          }));
    } catch (const error& ex) {
      row.error = ex.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

reduced_trajectory integrate(const reduced_state& s0, const model_params& p,
                             double dt, double t_end, std::size_t stride) {
  if (!(dt > 0.0)) throw invalid_argument("dt must be positive");
  if (t_end < 0.0) throw invalid_argument("t_end must be non-negative");
  if (stride == 0) throw invalid_argument("stride must be at least 1");
  const auto steps = static_cast<std::size_t>(std::llround(t_end / dt));
  reduced_trajectory tr;
  tr.t.reserve(steps / stride + 2);
  tr.states.reserve(steps / stride + 2);
  tr.t.push_back(0.0);
  tr.states.push_back(s0);
  auto axpy = [](const reduced_state& s, double h, const reduced_state& k) {
    return reduced_state{s.u1 + h * k.u1, s.v1 + h * k.v1, s.u2 + h * k.u2,
                         s.v2 + h * k.v2};
  };
  reduced_state s = s0;
  for (std::size_t n = 1; n <= steps; ++n) {
    const reduced_state k1 = reduced_rhs(s, p);
    const reduced_state k2 = reduced_rhs(axpy(s, 0.5 * dt, k1), p);
    const reduced_state k3 = reduced_rhs(axpy(s, 0.5 * dt, k2), p);
    const reduced_state k4 = reduced_rhs(axpy(s, dt, k3), p);
    const double w = dt / 6.0;
    s = {s.u1 + w * (k1.u1 + 2.0 * k2.u1 + 2.0 * k3.u1 + k4.u1),
         s.v1 + w * (k1.v1 + 2.0 * k2.v1 + 2.0 * k3.v1 + k4.v1),
         s.u2 + w * (k1.u2 + 2.0 * k2.u2 + 2.0 * k3.u2 + k4.u2),
         s.v2 + w * (k1.v2 + 2.0 * k2.v2 + 2.0 * k3.v2 + k4.v2)};
    const double t = static_cast<double>(n) * dt;
    for (double x : s.as_array()) {
      if (!(std::abs(x) <= 1e6)) {
        std::ostringstream os;
        os << "reduced model blew up at t = " << t;
        throw instability_fault(os.str(), t);
      }
    }
    if (n % stride == 0 || n == steps) {
      tr.t.push_back(t);
      tr.states.push_back(s);
    }
  }
  return tr;
}

std::vector<orbit> heteroclinic_orbits(const model_params& p,
                                       const orbit_options& opts) {
  const reduced_state saddle{p.gamma, p.c * p.gamma / p.e, p.gamma,
                             p.c * p.gamma / p.e};
  if (classify_stability(saddle, p).stability != reduced_stability::unstable) {
    throw invalid_argument("U2* is not unstable at these parameters");
  }
  const auto points = find_stationary(p);
  const double d = opts.magnitude;
  struct seed {
    const char* name;
    reduced_state start;
  };
  const seed seeds[] = {
      {"symmetric-minus", {saddle.u1 - d, saddle.v1, saddle.u2 - d, saddle.v2}},
      {"symmetric-plus", {saddle.u1 + d, saddle.v1, saddle.u2 + d, saddle.v2}},
      {"asymmetric", {saddle.u1 + d, saddle.v1, saddle.u2 - d, saddle.v2}},
  };
  std::vector<orbit> out;
  for (const auto& sd : seeds) {
    orbit o;
    o.name = sd.name;
    o.start = sd.start;
    o.trajectory = integrate(sd.start, p, opts.dt, opts.t_end, opts.stride);
    const reduced_state& end = o.trajectory.states.back();
    double best = std::numeric_limits<double>::infinity();
    const stationary_point* nearest = nullptr;
    for (const auto& sp : points) {
      const double dist = end.distance(sp.state);
      if (dist < best) {
        best = dist;
        nearest = &sp;
      }
    }
    o.endpoint_distance = best;
    if (nearest != nullptr && best <= opts.endpoint_tol) {
      o.endpoint = nearest->label.empty() ? std::string("unnamed") : nearest->label;
    }
    out.push_back(std::move(o));
  }
  return out;
}

}  // namespace kspattern
