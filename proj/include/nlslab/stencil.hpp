// Sixth-order centred finite differences in the w = r*u representation.
//
// Values beyond the mesh come from reflections. At r = 0 the reflection is odd
// for the l = 0 sector (w is odd in r) and even for the l = 1 sector
// (w ~ r^2). The last node r_max = n h is a Dirichlet wall (w = 0) with odd
// reflection beyond it. The wall node is decoupled from the interior: its row
// and column carry only the diagonal c0/h^2. With odd reflections at both
// ends the interior block is exactly diagonalized by the type-I sine transform
// of length n - 1.
#pragma once

#include "nlslab/grid.hpp"

#include <Eigen/Sparse>

namespace nlslab {

enum class Parity { odd, even };

// Coefficients of -h^2 d^2/dr^2: c0 w_i + sum_m c_m (w_{i+m} + w_{i-m}).
inline constexpr double kD2[4] = {49.0 / 18.0, -3.0 / 2.0, 3.0 / 20.0, -1.0 / 90.0};
// Coefficients of h d/dr: sum_m d_m (w_{i+m} - w_{i-m}).
inline constexpr double kD1[3] = {3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0};
inline constexpr int kHalfBandwidth = 3;

// T w = -w'' for real or complex samples.
RVec neg_d2(const RVec& w, double h, Parity p = Parity::odd);
CVec neg_d2(const CVec& w, double h, Parity p = Parity::odd);

// w' for real or complex samples.
RVec d1(const RVec& w, double h, Parity p = Parity::odd);
CVec d1(const CVec& w, double h, Parity p = Parity::odd);

// Sparse symmetric n x n matrix of T with the reflections folded in (the wall
// row and column hold only the diagonal).
Eigen::SparseMatrix<double> neg_d2_matrix(int n, double h, Parity p = Parity::odd);

// Eigenvalues of the interior block of T (odd parity) in type-I sine-transform
// order, n - 1 values:
// lambda_k = (c0 + 2 sum_m c_m cos(m theta_k)) / h^2, theta_k = (k+1) pi / n.
RVec neg_d2_symbol(int n, double h);

}  // namespace nlslab
