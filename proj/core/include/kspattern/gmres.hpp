#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace kspattern {

/// Matrix-free linear map on R^n: only the action x -> A x is required.
class linear_operator {
 public:
  using apply_fn = std::function<void(std::span<const double> x,
                                      std::span<double> y)>;

  linear_operator(std::size_t n, apply_fn fn);

  std::size_t size() const noexcept { return n_; }

  /// y = A x; throws dimension_error on a length mismatch.
  void apply(std::span<const double> x, std::span<double> y) const;
  std::vector<double> operator()(std::span<const double> x) const;

 private:
  std::size_t n_;
  apply_fn fn_;
};

/// Plane rotation [c s; -s c] chosen so that it maps (a, b) to (r, 0).
struct givens_rotation {
  double c = 1.0;
  double s = 0.0;

  static givens_rotation zeroing(double a, double b) noexcept;
  void apply(double& x, double& y) const noexcept {
    const double t = c * x + s * y;
    y = -s * x + c * y;
    x = t;
  }
};

/// Back substitution for the leading k x k block of an upper-triangular
/// matrix stored by columns (column j holds rows 0..j at least). Throws
/// singular_operator_fault on a zero pivot.
std::vector<double> back_substitute(const std::vector<std::vector<double>>& columns,
                                    std::span<const double> rhs, std::size_t k);

/// State of one GMRES solve: the orthonormal Krylov basis, the Hessenberg
/// projection (raw and rotated), the rotations and the transformed residual
/// vector g = r0 Q e1.
class gmres_workspace {
 public:
  /// Sets r0 = b - A x0 and, if r0 > 0, V1 = r0 / |r0|.
  gmres_workspace(const linear_operator& op, std::span<const double> b,
                  std::span<const double> x0, bool reorthogonalize = true);

  std::size_t dimension() const noexcept { return n_; }
  /// Number of Arnoldi steps taken (columns of H).
  std::size_t iterations() const noexcept { return hessenberg_.size(); }
  double initial_residual() const noexcept { return r0_; }
  /// Implicit residual |g_{k+1}| after the last rotation (r0 before any).
  double residual() const noexcept { return residual_; }
  bool breakdown() const noexcept { return breakdown_; }
  /// Columns whose Gram-Schmidt sweep needed a second pass.
  std::size_t reorthogonalized() const noexcept { return reorth_count_; }

  const std::vector<std::vector<double>>& basis() const noexcept { return basis_; }
  /// Raw Hessenberg columns: column k has k + 2 entries h_{1..k+2, k+1}.
  const std::vector<std::vector<double>>& hessenberg() const noexcept {
    return hessenberg_;
  }
  /// Rotated (triangularized) columns of H.
  const std::vector<std::vector<double>>& triangular() const noexcept {
    return triangular_;
  }
  const std::vector<givens_rotation>& rotations() const noexcept {
    return rotations_;
  }
  const std::vector<double>& transformed_residual() const noexcept { return g_; }
  const std::vector<double>& residual_history() const noexcept {
    return history_;
  }
  const std::vector<double>& initial_guess() const noexcept { return x0_; }

  /// Builds the next basis vector and Hessenberg column (modified
  /// Gram-Schmidt, one extra pass if orthogonality is lost). On breakdown
  /// (|V~| < 1e-14) the column is stored with a zero subdiagonal and no new
  /// basis vector is added.
  void arnoldi_step(const linear_operator& op);

  /// Applies the previous rotations to the newest column, creates the
  /// rotation that zeroes its subdiagonal, updates g and the residual.
  void apply_new_givens();

  /// Solves R y = g[0..k) for the current k.
  std::vector<double> solve_triangular() const;

  /// x0 + V y.
  std::vector<double> solution(std::span<const double> y) const;

 private:
  std::size_t n_;
  bool reorthogonalize_;
  std::vector<double> x0_;
  double r0_ = 0.0;
  double residual_ = 0.0;
  bool breakdown_ = false;
  std::size_t reorth_count_ = 0;
  std::vector<std::vector<double>> basis_;
  std::vector<std::vector<double>> hessenberg_;
  std::vector<std::vector<double>> triangular_;
  std::vector<givens_rotation> rotations_;
  std::vector<double> g_;
  std::vector<double> history_;
  std::vector<double> scratch_;
};

/// Free-function spellings of the workspace steps.
inline void arnoldi_step(gmres_workspace& ws, const linear_operator& op) {
  ws.arnoldi_step(op);
}
inline void apply_new_givens(gmres_workspace& ws) { ws.apply_new_givens(); }
inline std::vector<double> solve_triangular(const gmres_workspace& ws) {
  return ws.solve_triangular();
}

struct gmres_result {
  std::vector<double> x;
  /// r0 followed by the implicit residual after every iteration.
  std::vector<double> residual_history;
  bool converged = false;
  std::size_t iterations = 0;
  bool breakdown = false;
};

/// Full (unrestarted) GMRES. Stops as soon as the implicit residual drops
/// to eps or after max_iter iterations; y and x are formed only after the
/// loop. Throws singular_operator_fault if the Krylov space becomes
/// invariant while the residual is still above eps, numerical_fault on NaN.
gmres_result gmres_solve(const linear_operator& op, std::span<const double> b,
                         std::span<const double> x0, double eps,
                         std::size_t max_iter, bool reorthogonalize = true);

double dot(std::span<const double> a, std::span<const double> b) noexcept;
double norm2(std::span<const double> a) noexcept;

}  // namespace kspattern
