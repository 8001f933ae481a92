#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace kspattern {

/// Uniform rectangular grid. Storage is row-major: entry (i, j) is row i
/// (the y direction) and column j (the x direction), flat index i * nx + j.
struct grid_spec {
  std::size_t nx = 100;
  std::size_t ny = 100;
  double h = 1.0;

  /// Throws invalid_argument unless nx >= 3, ny >= 3 and h > 0.
  void validate() const;

  std::size_t size() const noexcept { return nx * ny; }
  std::size_t index(std::size_t i, std::size_t j) const noexcept {
    return i * nx + j;
  }

  friend bool operator==(const grid_spec&, const grid_spec&) = default;
};

/// Real-valued field sampled on a grid_spec.
class scalar_field {
 public:
  scalar_field() = default;

  /// Zero field.
  explicit scalar_field(const grid_spec& spec);

  /// Takes ownership of `values`; throws dimension_error on a size mismatch
  /// and numerical_fault if any entry is NaN or Inf.
  scalar_field(const grid_spec& spec, std::vector<double> values);

  static scalar_field constant(const grid_spec& spec, double value);

  const grid_spec& spec() const noexcept { return spec_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::size_t nx() const noexcept { return spec_.nx; }
  std::size_t ny() const noexcept { return spec_.ny; }

  double& operator()(std::size_t i, std::size_t j) noexcept {
    return values_[spec_.index(i, j)];
  }
  double operator()(std::size_t i, std::size_t j) const noexcept {
    return values_[spec_.index(i, j)];
  }
  double& operator[](std::size_t k) noexcept { return values_[k]; }
  double operator[](std::size_t k) const noexcept { return values_[k]; }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }
  const std::vector<double>& data() const noexcept { return values_; }

  bool all_finite() const noexcept;
  double min() const;
  double max() const;
  double sum() const noexcept;
  double mean() const;

  scalar_field& operator+=(const scalar_field& other);
  scalar_field& operator-=(const scalar_field& other);
  scalar_field& operator*=(double s) noexcept;

  friend scalar_field operator+(scalar_field a, const scalar_field& b) {
    return a += b;
  }
  friend scalar_field operator-(scalar_field a, const scalar_field& b) {
    return a -= b;
  }
  friend scalar_field operator*(double s, scalar_field a) { return a *= s; }

  friend bool operator==(const scalar_field&, const scalar_field&) = default;

 private:
  grid_spec spec_{};
  std::vector<double> values_;
};

/// Throws dimension_error when the two fields live on different grids.
void require_same_grid(const scalar_field& a, const scalar_field& b);

/// Five-point Laplacian with zero-flux (Neumann) boundaries. A ghost value
/// outside the domain equals the adjacent boundary value, so the boundary
/// face carries no flux and the grid sum of the result is exactly zero.
scalar_field laplacian(const scalar_field& f);

/// Centered differences (d/dx, d/dy). Ghosts mirror across the boundary
/// node (f[-1] = f[1]), so the normal component vanishes on the boundary.
std::pair<scalar_field, scalar_field> gradient(const scalar_field& f);

/// Pointwise grad(u) . grad(v) built from `gradient`.
scalar_field dot_gradients(const scalar_field& u, const scalar_field& v);

/// -b (grad u . grad v + u lap v), the expanded form of -b div(u grad v).
scalar_field chemotaxis_term(const scalar_field& u, const scalar_field& v,
                             double b);

}  // namespace kspattern
