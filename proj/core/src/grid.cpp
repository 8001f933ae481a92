#include "kspattern/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "kspattern/errors.hpp"

namespace kspattern {

void grid_spec::validate() const {
  if (nx < 3 || ny < 3) {
    throw invalid_argument("grid must be at least 3x3, got " +
                           std::to_string(nx) + "x" + std::to_string(ny));
  }
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw invalid_argument("grid step h must be positive");
  }
}

scalar_field::scalar_field(const grid_spec& spec)
    : spec_(spec), values_(spec.size(), 0.0) {}

scalar_field::scalar_field(const grid_spec& spec, std::vector<double> values)
    : spec_(spec), values_(std::move(values)) {
  if (values_.size() != spec_.size()) {
    throw dimension_error("field has " + std::to_string(values_.size()) +
                          " values, grid needs " +
                          std::to_string(spec_.size()));
  }
  if (!all_finite()) throw numerical_fault("field contains NaN or Inf");
}

scalar_field scalar_field::constant(const grid_spec& spec, double value) {
  scalar_field f(spec);
  std::fill(f.values_.begin(), f.values_.end(), value);
  return f;
}

bool scalar_field::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(),
                     [](double x) { return std::isfinite(x); });
}

double scalar_field::min() const {
  if (values_.empty()) throw dimension_error("min of empty field");
  return *std::min_element(values_.begin(), values_.end());
}

double scalar_field::max() const {
  if (values_.empty()) throw dimension_error("max of empty field");
  return *std::max_element(values_.begin(), values_.end());
}

double scalar_field::sum() const noexcept {
  return std::accumulate(values_.begin(), values_.end(), 0.0);
}

double scalar_field::mean() const {
  if (values_.empty()) throw dimension_error("mean of empty field");
  return sum() / static_cast<double>(values_.size());
}

scalar_field& scalar_field::operator+=(const scalar_field& other) {
  require_same_grid(*this, other);
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += other.values_[k];
  return *this;
}

scalar_field& scalar_field::operator-=(const scalar_field& other) {
  require_same_grid(*this, other);
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= other.values_[k];
  return *this;
}

scalar_field& scalar_field::operator*=(double s) noexcept {
  for (double& x : values_) x *= s;
  return *this;
}

void require_same_grid(const scalar_field& a, const scalar_field& b) {
  if (!(a.spec() == b.spec()) || a.size() != b.size()) {
    throw dimension_error("fields live on different grids (" +
                          std::to_string(a.nx()) + "x" + std::to_string(a.ny()) +
                          " vs " + std::to_string(b.nx()) + "x" +
                          std::to_string(b.ny()) + ")");
  }
}

scalar_field laplacian(const scalar_field& f) {
  const auto& s = f.spec();
  const std::size_t nx = s.nx, ny = s.ny;
  const double inv_h2 = 1.0 / (s.h * s.h);
  scalar_field out(s);
  for (std::size_t i = 0; i < ny; ++i) {
    const std::size_t up = i == 0 ? 0 : i - 1;
    const std::size_t down = i + 1 == ny ? i : i + 1;
    for (std::size_t j = 0; j < nx; ++j) {
      const std::size_t left = j == 0 ? 0 : j - 1;
      const std::size_t right = j + 1 == nx ? j : j + 1;
      out(i, j) = (f(up, j) + f(down, j) + f(i, left) + f(i, right) -
                   4.0 * f(i, j)) *
                  inv_h2;
    }
  }
  return out;
}

std::pair<scalar_field, scalar_field> gradient(const scalar_field& f) {
  const auto& s = f.spec();
  const std::size_t nx = s.nx, ny = s.ny;
  const double inv_2h = 0.5 / s.h;
  scalar_field dx(s), dy(s);
  for (std::size_t i = 0; i < ny; ++i) {
    // Mirrored ghosts: index -1 maps to 1 and index n maps to n - 2.
    const std::size_t up = i == 0 ? 1 : i - 1;
    const std::size_t down = i + 1 == ny ? ny - 2 : i + 1;
    for (std::size_t j = 0; j < nx; ++j) {
      const std::size_t left = j == 0 ? 1 : j - 1;
      const std::size_t right = j + 1 == nx ? nx - 2 : j + 1;
      dx(i, j) = (f(i, right) - f(i, left)) * inv_2h;
      dy(i, j) = (f(down, j) - f(up, j)) * inv_2h;
    }
  }
  return {std::move(dx), std::move(dy)};
}

scalar_field dot_gradients(const scalar_field& u, const scalar_field& v) {
  require_same_grid(u, v);
  auto [ux, uy] = gradient(u);
  auto [vx, vy] = gradient(v);
  scalar_field out(u.spec());
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = ux[k] * vx[k] + uy[k] * vy[k];
  }
  return out;
}

scalar_field chemotaxis_term(const scalar_field& u, const scalar_field& v,
                             double b) {
  require_same_grid(u, v);
  scalar_field out = dot_gradients(u, v);
  const scalar_field lap_v = laplacian(v);
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = -b * (out[k] + u[k] * lap_v[k]);
  }
  return out;
}

}  // namespace kspattern
