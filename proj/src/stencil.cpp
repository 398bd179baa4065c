#include "nlslab/stencil.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace nlslab {

namespace {

// Maps a neighbour index to (source index, sign); sign 0 marks a wall point
// (the origin at k = -1 and the pinned last node k = n - 1).
struct Ghost {
    int index;
    double sign;
};

Ghost reflect(int k, int n, Parity p) {
    const int wall = n - 1;
    if (k >= 0 && k < wall) return {k, 1.0};
    if (k == -1 || k == wall) return {0, 0.0};
    if (k < -1) return {-k - 2, p == Parity::odd ? -1.0 : 1.0};
    return {2 * wall - k, -1.0};
}

template <class Vec>
Vec apply_neg_d2(const Vec& w, double h, Parity p) {
    const int n = static_cast<int>(w.size());
    Vec out(n);
    const double inv_h2 = 1.0 / (h * h);
    auto at = [&](int k) {
        const Ghost g = reflect(k, n, p);
        return g.sign == 0.0 ? typename Vec::Scalar(0) : g.sign * w[g.index];
    };
    for (int i = 0; i < n - 1; ++i) {
        if (i >= kHalfBandwidth && i < n - 1 - kHalfBandwidth) {
            out[i] = inv_h2 * (kD2[0] * w[i] + kD2[1] * (w[i + 1] + w[i - 1]) +
                               kD2[2] * (w[i + 2] + w[i - 2]) + kD2[3] * (w[i + 3] + w[i - 3]));
        } else {
            auto acc = kD2[0] * w[i];
            for (int m = 1; m <= kHalfBandwidth; ++m) acc += kD2[m] * (at(i + m) + at(i - m));
            out[i] = inv_h2 * acc;
        }
    }
    // The wall node is decoupled; its diagonal keeps the matrix non-singular.
    out[n - 1] = inv_h2 * kD2[0] * w[n - 1];
    return out;
}

template <class Vec>
Vec apply_d1(const Vec& w, double h, Parity p) {
    const int n = static_cast<int>(w.size());
    Vec out(n);
    const double inv_h = 1.0 / h;
    auto at = [&](int k) {
        const Ghost g = reflect(k, n, p);
        return g.sign == 0.0 ? typename Vec::Scalar(0) : g.sign * w[g.index];
    };
    for (int i = 0; i < n; ++i) {
        typename Vec::Scalar acc(0);
        for (int m = 1; m <= kHalfBandwidth; ++m) acc += kD1[m - 1] * (at(i + m) - at(i - m));
        out[i] = inv_h * acc;
    }
    return out;
}

}  // namespace

RVec neg_d2(const RVec& w, double h, Parity p) { return apply_neg_d2(w, h, p); }
CVec neg_d2(const CVec& w, double h, Parity p) { return apply_neg_d2(w, h, p); }
RVec d1(const RVec& w, double h, Parity p) { return apply_d1(w, h, p); }
CVec d1(const CVec& w, double h, Parity p) { return apply_d1(w, h, p); }

Eigen::SparseMatrix<double> neg_d2_matrix(int n, double h, Parity p) {
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<size_t>(n) * (2 * kHalfBandwidth + 1) + 8);
    const double inv_h2 = 1.0 / (h * h);
    for (int i = 0; i < n; ++i) {
        trips.emplace_back(i, i, kD2[0] * inv_h2);
        if (i == n - 1) break;  // decoupled wall node
        for (int m = 1; m <= kHalfBandwidth; ++m) {
            for (int k : {i + m, i - m}) {
                const Ghost g = reflect(k, n, p);
                if (g.sign != 0.0) trips.emplace_back(i, g.index, g.sign * kD2[m] * inv_h2);
            }
        }
    }
    Eigen::SparseMatrix<double> t(n, n);
    t.setFromTriplets(trips.begin(), trips.end());
    return t;
}

RVec neg_d2_symbol(int n, double h) {
    RVec lam(n - 1);
    for (int k = 0; k < n - 1; ++k) {
        const double theta = (k + 1) * std::numbers::pi / n;
        double s = kD2[0];
        for (int m = 1; m <= kHalfBandwidth; ++m) s += 2.0 * kD2[m] * std::cos(m * theta);
        lam[k] = s / (h * h);
    }
    return lam;
}

}  // namespace nlslab
