// Sparse symmetric eigen-tools built on LDL^T inertia (Sylvester's law).
//
// For a symmetric pencil (A, H) with H positive definite and optional linear
// constraints C x = 0 (C has full row rank m), the number of constrained
// eigenvalues below sigma equals  #neg(KKT(sigma)) - m,  where
//   KKT(sigma) = [[A - sigma H, C^T], [C, 0]].
// Counts are obtained from the diagonal of an LDL^T factorization in natural
// ordering, which keeps banded matrices banded.
#pragma once

#include "nlslab/grid.hpp"

#include <Eigen/Sparse>

#include <vector>

namespace nlslab {

using SpMat = Eigen::SparseMatrix<double>;

// Number of eigenvalues of the constrained pencil strictly below sigma.
// H == nullptr means the identity; constraints rows may be empty.
int count_eigenvalues_below(const SpMat& a, double sigma, const SpMat* h = nullptr,
                            const std::vector<RVec>& constraints = {});

// Smallest eigenvalue of the constrained pencil by inertia bisection on
// [lo, hi] to absolute tolerance tol. Requires count(lo) == 0 and
// count(hi) >= 1.
double smallest_eigenvalue(const SpMat& a, double lo, double hi, double tol,
                           const SpMat* h = nullptr, const std::vector<RVec>& constraints = {});

struct EigenPairs {
    std::vector<double> values;
    std::vector<RVec> vectors;  // orthonormal in the Euclidean inner product
};

// The k eigenpairs of the symmetric matrix a closest to sigma, by block
// shift-invert iteration with Rayleigh-Ritz.
EigenPairs eigenpairs_near(const SpMat& a, double sigma, int k, int iterations = 30);

}  // namespace nlslab
