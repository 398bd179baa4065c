#include "nlslab/spectral_utils.hpp"

#include "nlslab/errors.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <random>

namespace nlslab {

namespace {

SpMat kkt_matrix(const SpMat& a, double sigma, const SpMat* h, const std::vector<RVec>& constraints) {
    const int n = static_cast<int>(a.rows());
    const int m = static_cast<int>(constraints.size());
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<size_t>(a.nonZeros()) + static_cast<size_t>(2 * m * n) + n);
    for (int k = 0; k < a.outerSize(); ++k) {
        for (SpMat::InnerIterator it(a, k); it; ++it) trips.emplace_back(it.row(), it.col(), it.value());
    }
    if (h) {
        for (int k = 0; k < h->outerSize(); ++k) {
            for (SpMat::InnerIterator it(*h, k); it; ++it) {
                trips.emplace_back(it.row(), it.col(), -sigma * it.value());
            }
        }
    } else {
        for (int i = 0; i < n; ++i) trips.emplace_back(i, i, -sigma);
    }
    for (int j = 0; j < m; ++j) {
        const RVec& c = constraints[j];
        const double scale = 1.0 / c.norm();
        for (int i = 0; i < n; ++i) {
            if (c[i] != 0.0) {
                trips.emplace_back(n + j, i, c[i] * scale);
                trips.emplace_back(i, n + j, c[i] * scale);
            }
        }
    }
    SpMat k(n + m, n + m);
    k.setFromTriplets(trips.begin(), trips.end());
    return k;
}

}  // namespace

int count_eigenvalues_below(const SpMat& a, double sigma, const SpMat* h,
                            const std::vector<RVec>& constraints) {
    const int m = static_cast<int>(constraints.size());
    // A shift that lands exactly on an eigenvalue would give a zero pivot;
    // nudge it by a relative 1e-13 in that unlikely case.
    for (int attempt = 0; attempt < 4; ++attempt) {
        const double s = sigma + attempt * 1e-13 * std::max(1.0, std::abs(sigma));
        const SpMat k = kkt_matrix(a, s, h, constraints);
        Eigen::SimplicialLDLT<SpMat, Eigen::Lower, Eigen::NaturalOrdering<int>> ldlt(k);
        if (ldlt.info() != Eigen::Success) continue;
        const RVec d = ldlt.vectorD();
        if (!d.allFinite() || (d.array() == 0.0).any()) continue;
        const int neg = static_cast<int>((d.array() < 0.0).count());
        return neg - m;
    }
    throw NumericError("count_eigenvalues_below: LDL^T factorization broke down");
}

double smallest_eigenvalue(const SpMat& a, double lo, double hi, double tol, const SpMat* h,
                           const std::vector<RVec>& constraints) {
    if (count_eigenvalues_below(a, lo, h, constraints) != 0) {
        throw NumericError("smallest_eigenvalue: lower bound is not below the spectrum");
    }
    if (count_eigenvalues_below(a, hi, h, constraints) < 1) {
        throw NumericError("smallest_eigenvalue: upper bound is not above the smallest eigenvalue");
    }
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (count_eigenvalues_below(a, mid, h, constraints) >= 1) hi = mid;
        else lo = mid;
    }
    return 0.5 * (lo + hi);
}

EigenPairs eigenpairs_near(const SpMat& a, double sigma, int k, int iterations) {
    const int n = static_cast<int>(a.rows());
    SpMat shifted = a;
    for (int i = 0; i < n; ++i) shifted.coeffRef(i, i) -= sigma;
    Eigen::SparseLU<SpMat> lu(shifted);
    if (lu.info() != Eigen::Success) throw NumericError("eigenpairs_near: shifted matrix singular");

    std::mt19937_64 rng(12345);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd x(n, k);
    for (int j = 0; j < k; ++j)
        for (int i = 0; i < n; ++i) x(i, j) = normal(rng);

    Eigen::VectorXd values(k);
    for (int it = 0; it < iterations; ++it) {
        Eigen::MatrixXd y(n, k);
        for (int j = 0; j < k; ++j) y.col(j) = lu.solve(RVec(x.col(j)));
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(y);
        const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, k);
        const Eigen::MatrixXd small = q.transpose() * (a * q);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (small + small.transpose()));
        x = q * es.eigenvectors();
        values = es.eigenvalues();
    }
    EigenPairs out;
    for (int j = 0; j < k; ++j) {
        out.values.push_back(values[j]);
        out.vectors.push_back(x.col(j));
    }
    return out;
}

}  // namespace nlslab
