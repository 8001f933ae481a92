#include "kspattern/gmres.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "kspattern/errors.hpp"

namespace kspattern {

namespace {

constexpr double breakdown_tol = 1e-14;
constexpr double reorth_tol = 1e-8;

void require_length(std::span<const double> v, std::size_t n,
                    const char* what) {
  if (v.size() != n) {
    throw dimension_error(std::string(what) + " has length " +
                          std::to_string(v.size()) + ", operator needs " +
                          std::to_string(n));
  }
}

}  // namespace

double dot(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

double norm2(std::span<const double> a) noexcept {
  // Scaled sum of squares so large residuals do not overflow.
  double scale = 0.0, ssq = 1.0;
  for (double x : a) {
    if (x == 0.0) continue;
    const double ax = std::abs(x);
    if (scale < ax) {
      ssq = 1.0 + ssq * (scale / ax) * (scale / ax);
      scale = ax;
    } else {
      ssq += (ax / scale) * (ax / scale);
    }
  }
  return scale * std::sqrt(ssq);
}

linear_operator::linear_operator(std::size_t n, apply_fn fn)
    : n_(n), fn_(std::move(fn)) {
  if (n_ == 0) throw invalid_argument("operator dimension must be positive");
  if (!fn_) throw invalid_argument("operator needs an apply function");
}

void linear_operator::apply(std::span<const double> x,
                            std::span<double> y) const {
  require_length(x, n_, "input vector");
  require_length(y, n_, "output vector");
  fn_(x, y);
}

std::vector<double> linear_operator::operator()(
    std::span<const double> x) const {
  std::vector<double> y(n_, 0.0);
  apply(x, y);
  return y;
}

givens_rotation givens_rotation::zeroing(double a, double b) noexcept {
  if (b == 0.0) return {1.0, 0.0};
  const double r = std::hypot(a, b);
  return {a / r, b / r};
}

std::vector<double> back_substitute(
    const std::vector<std::vector<double>>& columns,
    std::span<const double> rhs, std::size_t k) {
  if (columns.size() < k || rhs.size() < k) {
    throw dimension_error("triangular system smaller than requested order");
  }
  std::vector<double> y(rhs.begin(), rhs.begin() + static_cast<long>(k));
  for (std::size_t r = k; r-- > 0;) {
    const double pivot = columns[r][r];
    if (pivot == 0.0 || !std::isfinite(pivot)) {
      throw singular_operator_fault("zero pivot in row " + std::to_string(r) +
                                    " of the triangular system");
    }
    y[r] /= pivot;
    for (std::size_t i = 0; i < r; ++i) y[i] -= columns[r][i] * y[r];
  }
  return y;
}

gmres_workspace::gmres_workspace(const linear_operator& op,
                                 std::span<const double> b,
                                 std::span<const double> x0,
                                 bool reorthogonalize)
    : n_(op.size()),
      reorthogonalize_(reorthogonalize),
      x0_(x0.begin(), x0.end()),
      scratch_(op.size(), 0.0) {
  require_length(b, n_, "right-hand side");
  require_length(x0, n_, "initial guess");
  std::vector<double> r(n_);
  op.apply(x0_, r);
  for (std::size_t k = 0; k < n_; ++k) r[k] = b[k] - r[k];
  r0_ = norm2(r);
  if (!std::isfinite(r0_)) throw numerical_fault("initial residual is not finite");
  residual_ = r0_;
  history_.push_back(r0_);
  g_.push_back(r0_);
  if (r0_ > 0.0) {
    for (double& x : r) x /= r0_;
    basis_.push_back(std::move(r));
  }
}

void gmres_workspace::arnoldi_step(const linear_operator& op) {
  const std::size_t k = hessenberg_.size();
  if (breakdown_ || basis_.size() != k + 1) {
    throw invalid_argument("no basis vector available for an Arnoldi step");
  }
  std::vector<double>& w = scratch_;
  op.apply(basis_[k], w);
  std::vector<double> column(k + 2, 0.0);
  // Modified Gram-Schmidt sweep: beta_j = (A V_k, V_j).
  for (std::size_t j = 0; j <= k; ++j) {
    const double beta = dot(w, basis_[j]);
    column[j] = beta;
    for (std::size_t q = 0; q < n_; ++q) w[q] -= beta * basis_[j][q];
  }
  double wnorm = norm2(w);
  if (reorthogonalize_ && wnorm > 0.0) {
    bool lost = false;
    for (std::size_t j = 0; j <= k && !lost; ++j) {
      lost = std::abs(dot(w, basis_[j])) > reorth_tol * wnorm;
    }
    if (lost) {
      ++reorth_count_;
      for (std::size_t j = 0; j <= k; ++j) {
        const double beta = dot(w, basis_[j]);
        column[j] += beta;
        for (std::size_t q = 0; q < n_; ++q) w[q] -= beta * basis_[j][q];
      }
      wnorm = norm2(w);
    }
  }
  if (!std::isfinite(wnorm)) throw numerical_fault("Arnoldi vector is not finite");
  if (wnorm < breakdown_tol) {
    breakdown_ = true;
    column[k + 1] = 0.0;
  } else {
    column[k + 1] = wnorm;
    std::vector<double> next(w.begin(), w.end());
    for (double& x : next) x /= wnorm;
    basis_.push_back(std::move(next));
  }
  hessenberg_.push_back(column);
  triangular_.push_back(std::move(column));
}

void gmres_workspace::apply_new_givens() {
  const std::size_t k = triangular_.size();
  if (k == 0 || rotations_.size() != k - 1) {
    throw invalid_argument("no fresh Hessenberg column to rotate");
  }
  std::vector<double>& col = triangular_.back();
  for (std::size_t i = 0; i + 1 < k; ++i) rotations_[i].apply(col[i], col[i + 1]);
  const givens_rotation rot = givens_rotation::zeroing(col[k - 1], col[k]);
  rot.apply(col[k - 1], col[k]);
  col[k] = 0.0;
  rotations_.push_back(rot);
  g_.push_back(0.0);
  rot.apply(g_[k - 1], g_[k]);
  residual_ = std::abs(g_[k]);
  history_.push_back(residual_);
}

std::vector<double> gmres_workspace::solve_triangular() const {
  const std::size_t k = rotations_.size();
  return back_substitute(triangular_, g_, k);
}

std::vector<double> gmres_workspace::solution(std::span<const double> y) const {
  std::vector<double> x = x0_;
  for (std::size_t i = 0; i < y.size(); ++i) {
    for (std::size_t q = 0; q < n_; ++q) x[q] += y[i] * basis_[i][q];
  }
  return x;
}

gmres_result gmres_solve(const linear_operator& op, std::span<const double> b,
                         std::span<const double> x0, double eps,
                         std::size_t max_iter, bool reorthogonalize) {
  if (!(eps > 0.0)) throw invalid_argument("eps must be positive");
  if (max_iter < 1) throw invalid_argument("max_iter must be at least 1");
  gmres_workspace ws(op, b, x0, reorthogonalize);
  gmres_result out;
  if (ws.initial_residual() < eps) {
    out.x = ws.initial_guess();
    out.residual_history = ws.residual_history();
    out.converged = true;
    return out;
  }
  while (ws.residual() > eps && ws.iterations() < max_iter) {
    ws.arnoldi_step(op);
    ws.apply_new_givens();
    if (!std::isfinite(ws.residual())) {
      throw numerical_fault("GMRES residual became non-finite");
    }
    if (ws.breakdown()) break;
  }
  out.iterations = ws.iterations();
  out.breakdown = ws.breakdown();
  out.residual_history = ws.residual_history();
  out.converged = ws.residual() <= eps;
  if (ws.breakdown() && !out.converged) {
    throw singular_operator_fault(
        "Krylov space became invariant with residual " +
        std::to_string(ws.residual()) + " above eps");
  }
  const std::vector<double> y = ws.solve_triangular();
  out.x = ws.solution(y);
  for (double v : out.x) {
    if (!std::isfinite(v)) throw numerical_fault("GMRES solution is not finite");
  }
  return out;
}

}  // namespace kspattern
