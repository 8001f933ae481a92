#pragma once

// Brute-force reference implementations. Everything here is assembled
// entry by entry from the stencil definitions and solved densely, so it
// shares no code with the matrix-free library paths it checks.

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "kspattern/grid.hpp"
#include "kspattern/kinetics.hpp"

namespace kspattern::oracle {

using matrix = Eigen::MatrixXd;
using vector = Eigen::VectorXd;

/// Five-point Neumann Laplacian; an off-grid neighbor is replaced by the
/// boundary point itself.
matrix laplacian_matrix(const grid_spec& g);

/// Centered x (column) and y (row) differences with mirrored ghosts.
matrix gradient_x_matrix(const grid_spec& g);
matrix gradient_y_matrix(const grid_spec& g);

/// Dense x -> -grad u . grad x - u lap x.
matrix elliptic_matrix(const scalar_field& u);

vector to_vector(const scalar_field& f);
scalar_field to_field(const grid_spec& g, const vector& v);

/// Partial-pivot LU solve.
vector dense_solve(const matrix& a, const vector& b);

/// Uniform [lo, hi) field from a seeded generator.
scalar_field random_field(const grid_spec& g, std::uint64_t seed,
                          double lo = -1.0, double hi = 1.0);

/// Random diagonally dominant n x n matrix.
matrix random_dominant_matrix(std::size_t n, std::uint64_t seed);

double max_abs_diff(const scalar_field& a, const scalar_field& b);
double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b);

/// Pearson correlation of two equally long samples.
double pearson(const std::vector<double>& a, const std::vector<double>& b);

/// |a - b|_2 / |b|_2 after removing the mean of each.
double centered_relative_error(const scalar_field& a, const scalar_field& b);

/// Smooth positive density u_t, smooth attractant v* on the unit square
/// (cell centers, h = 1) and the frame u_next that one unit step of the
/// forward relation produces from them, assembled with the dense operators.
struct manufactured_pair {
  scalar_field u_t, u_next, v_star;
};
manufactured_pair manufactured(std::size_t n, const model_params& p,
                               double k = 3.0);

}  // namespace kspattern::oracle
