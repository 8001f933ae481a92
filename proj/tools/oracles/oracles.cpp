#include "kspattern/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace kspattern::oracle {

matrix laplacian_matrix(const grid_spec& g) {
  const auto n = static_cast<Eigen::Index>(g.size());
  matrix l = matrix::Zero(n, n);
  const double w = 1.0 / (g.h * g.h);
  const long ny = static_cast<long>(g.ny), nx = static_cast<long>(g.nx);
  for (long i = 0; i < ny; ++i) {
    for (long j = 0; j < nx; ++j) {
      const long row = i * nx + j;
      const long di[] = {-1, 1, 0, 0};
      const long dj[] = {0, 0, -1, 1};
      for (int k = 0; k < 4; ++k) {
        const long ii = i + di[k], jj = j + dj[k];
        const bool inside = ii >= 0 && ii < ny && jj >= 0 && jj < nx;
        l(row, inside ? ii * nx + jj : row) += w;
      }
      l(row, row) -= 4.0 * w;
    }
  }
  return l;
}

namespace {

matrix centered(const grid_spec& g, bool along_x) {
  const auto n = static_cast<Eigen::Index>(g.size());
  matrix d = matrix::Zero(n, n);
  const long ny = static_cast<long>(g.ny), nx = static_cast<long>(g.nx);
  const long len = along_x ? nx : ny;
  for (long i = 0; i < ny; ++i) {
    for (long j = 0; j < nx; ++j) {
      const long row = i * nx + j;
      const long pos = along_x ? j : i;
      long lo = pos - 1, hi = pos + 1;
      if (lo < 0) lo = 1;
      if (hi >= len) hi = len - 2;
      const long col_lo = along_x ? i * nx + lo : lo * nx + j;
      const long col_hi = along_x ? i * nx + hi : hi * nx + j;
      d(row, col_hi) += 0.5 / g.h;
      d(row, col_lo) -= 0.5 / g.h;
    }
  }
  return d;
}

}  // namespace

matrix gradient_x_matrix(const grid_spec& g) { return centered(g, true); }
matrix gradient_y_matrix(const grid_spec& g) { return centered(g, false); }

matrix elliptic_matrix(const scalar_field& u) {
  const grid_spec& g = u.spec();
  const matrix dx = gradient_x_matrix(g), dy = gradient_y_matrix(g);
  const vector uv = to_vector(u);
  const vector ux = dx * uv, uy = dy * uv;
  return -(ux.asDiagonal() * dx) - (uy.asDiagonal() * dy) -
         (uv.asDiagonal() * laplacian_matrix(g));
}

vector to_vector(const scalar_field& f) {
  vector v(static_cast<Eigen::Index>(f.size()));
  for (std::size_t k = 0; k < f.size(); ++k) v(static_cast<Eigen::Index>(k)) = f[k];
  return v;
}

scalar_field to_field(const grid_spec& g, const vector& v) {
  return scalar_field(g, std::vector<double>(v.data(), v.data() + v.size()));
}

vector dense_solve(const matrix& a, const vector& b) {
  return a.partialPivLu().solve(b);
}

scalar_field random_field(const grid_spec& g, std::uint64_t seed, double lo,
                          double hi) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> v(g.size());
  for (double& x : v) x = dist(rng);
  return scalar_field(g, std::move(v));
}

matrix random_dominant_matrix(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  const auto m = static_cast<Eigen::Index>(n);
  matrix a(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) a(i, j) = dist(rng);
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    a(i, i) = a.row(i).cwiseAbs().sum() + 1.0;
  }
  return a;
}

double max_abs_diff(const scalar_field& a, const scalar_field& b) {
  return max_abs_diff(a.data(), b.data());
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("length mismatch");
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.empty()) throw std::invalid_argument("bad sample");
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    ma += a[k];
    mb += b[k];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    sab += (a[k] - ma) * (b[k] - mb);
    saa += (a[k] - ma) * (a[k] - ma);
    sbb += (b[k] - mb) * (b[k] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

double centered_relative_error(const scalar_field& a, const scalar_field& b) {
  const double ma = a.mean(), mb = b.mean();
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = (a[k] - ma) - (b[k] - mb);
    num += d * d;
    den += (b[k] - mb) * (b[k] - mb);
  }
  return std::sqrt(num / den);
}

manufactured_pair manufactured(std::size_t n, const model_params& p, double k) {
  const double pi = std::numbers::pi;
  const grid_spec g{n, n, 1.0};
  manufactured_pair m{scalar_field(g), scalar_field(g), scalar_field(g)};
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double x = (static_cast<double>(j) + 0.5) * inv_n;
      const double y = (static_cast<double>(i) + 0.5) * inv_n;
      m.u_t(i, j) = 0.6 + 0.3 * std::cos(pi * x) * std::cos(2 * pi * y);
      m.v_star(i, j) = std::cos(k * pi * x) * std::cos(pi * y) +
                       0.5 * std::cos(2 * k * pi * y);
    }
  }
  const vector av = elliptic_matrix(m.u_t) * to_vector(m.v_star);
  const vector lap = laplacian_matrix(g) * to_vector(m.u_t);
  for (std::size_t q = 0; q < g.size(); ++q) {
    const auto e = static_cast<Eigen::Index>(q);
    m.u_next[q] = m.u_t[q] + reaction(m.u_t[q], p) + p.d_u * lap(e) + p.b * av(e);
  }
  return m;
}

}  // namespace kspattern::oracle
