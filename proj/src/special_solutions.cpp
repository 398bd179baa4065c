#include "nlslab/special_solutions.hpp"

#include "nlslab/errors.hpp"

#include <cmath>
#include <sstream>

namespace nlslab {

namespace {

RVec stack(const StatePair& s) {
    const RVec re = pack_real(s);
    const RVec im = pack_imag(s);
    RVec x(re.size() + im.size());
    x << re, im;
    return x;
}

StatePair unstack(const GridPtr& grid, const RVec& x) {
    const Eigen::Index n2 = x.size() / 2;
    return unpack(grid, x.head(n2), x.tail(n2));
}

// Quadratic part of R with the first factor from x and the second from y.
// Summed over ordered pairs (a, b) this reproduces the quadratic terms of
// R(sum_a Z_a) exactly.
void add_quadratic(const GroundState& gs, const StatePair& x, const StatePair& y, StatePair& out) {
    const double beta = gs.beta;
    for (int i = 0; i < out.size(); ++i) {
        const double p = gs.phi[i], q = gs.psi[i];
        const cplx hx = x.u[i], kx = x.v[i], hy = y.u[i], ky = y.v[i];
        out.u[i] += 2.0 * p * hx * std::conj(hy) + p * hx * hy + beta * p * kx * std::conj(ky) +
                    beta * q * hx * (ky + std::conj(ky));
        out.v[i] += 2.0 * q * kx * std::conj(ky) + q * kx * ky + beta * q * hx * std::conj(hy) +
                    beta * p * ky * (hx + std::conj(hx));
    }
}

// Cubic part of R: |h|^2 h + beta |k|^2 h and |k|^2 k + beta |h|^2 k.
void add_cubic(const GroundState& gs, const StatePair& x, const StatePair& y, const StatePair& z,
               StatePair& out) {
    const double beta = gs.beta;
    for (int i = 0; i < out.size(); ++i) {
        const cplx hh = x.u[i] * std::conj(y.u[i]);
        const cplx kk = x.v[i] * std::conj(y.v[i]);
        out.u[i] += (hh + beta * kk) * z.u[i];
        out.v[i] += (kk + beta * hh) * z.v[i];
    }
}

double l2_norm(const StatePair& s) { return std::sqrt(s.u.squaredNorm() + s.v.squaredNorm()); }

int resolve_order(const FrequencySeries& series, int l) {
    if (l <= 0) return series.order();
    if (l > series.order()) {
        throw ConfigError("requested order " + std::to_string(l) + " exceeds the series order " +
                          std::to_string(series.order()));
    }
    return l;
}

}  // namespace

StatePair remainder_coefficient(const GroundState& gs, const std::vector<StatePair>& Z, int n) {
    StatePair out = StatePair::zero(gs.grid);
    const int avail = static_cast<int>(Z.size());
    for (int a = 1; a < n; ++a) {
        const int b = n - a;
        if (a > avail || b > avail) continue;
        add_quadratic(gs, Z[a - 1], Z[b - 1], out);
    }
    for (int a = 1; a < n; ++a) {
        for (int b = 1; a + b < n; ++b) {
            const int c = n - a - b;
            if (a > avail || b > avail || c > avail) continue;
            add_cubic(gs, Z[a - 1], Z[b - 1], Z[c - 1], out);
        }
    }
    return out;
}

FrequencySeries build_Z_sequence(const SectorPtr& op, const SpectralPtr& spectral, double A, int l_max) {
    if (l_max < 1) throw ConfigError("build_Z_sequence: l_max must be at least 1");
    if (!op || !spectral) throw ConfigError("build_Z_sequence: missing operator or spectral data");
    const GroundState& gs = *op->gs;
    FrequencySeries series;
    series.op = op;
    series.spectral = spectral;
    series.A = A;
    series.e0 = spectral->e0;
    series.Z.push_back(cplx(A, 0.0) * spectral->Yplus);
    series.solve_residual.push_back(spectral->eigen_residual);

    const SpMat lmat = script_L_matrix(*op);
    for (int n = 2; n <= l_max; ++n) {
        const double shift = n * series.e0;
        // The only real eigenvalues of Lcal are +-e0.
        if (std::abs(shift - series.e0) < 1e-6 || std::abs(shift + series.e0) < 1e-6) {
            std::ostringstream msg;
            msg << "build_Z_sequence: frequency " << n << " e0 = " << shift << " resonates with the spectrum";
            throw NumericError(msg.str());
        }
        const StatePair rn = remainder_coefficient(gs, series.Z, n);
        const RVec rhs = stack(cplx(0.0, 1.0) * rn);
        const double rhs_norm = rhs.norm();
        if (rhs_norm == 0.0) {
            series.Z.push_back(StatePair::zero(gs.grid));
            series.solve_residual.push_back(0.0);
            continue;
        }
        const ShiftedLcalSolver solver(*op, shift);
        const RVec x = solver.solve(rhs);
        const double res = (lmat * x - shift * x - rhs).norm() / rhs_norm;
        if (!std::isfinite(res) || res > 1e-9) {
            std::ostringstream msg;
            msg << "build_Z_sequence: solve for Z_" << n << " is near-singular (relative residual " << res << ")";
            throw NumericError(msg.str());
        }
        series.Z.push_back(unstack(gs.grid, x));
        series.solve_residual.push_back(res);
    }
    return series;
}

StatePair eval_V(const FrequencySeries& series, double t, int l) {
    const int order = resolve_order(series, l);
    StatePair v = StatePair::zero(series.op->gs->grid);
    for (int j = 1; j <= order; ++j) v += std::exp(-j * series.e0 * t) * series.Z[j - 1];
    return v;
}

StatePair eval_dVdt(const FrequencySeries& series, double t, int l) {
    const int order = resolve_order(series, l);
    StatePair v = StatePair::zero(series.op->gs->grid);
    for (int j = 1; j <= order; ++j) v += (-j * series.e0 * std::exp(-j * series.e0 * t)) * series.Z[j - 1];
    return v;
}

StatePair residual_epsilon(const FrequencySeries& series, double t, int l) {
    const int order = resolve_order(series, l);
    const StatePair v = eval_V(series, t, order);
    StatePair eps = eval_dVdt(series, t, order);
    eps += apply_script_L(*series.op, v);
    eps -= cplx(0.0, 1.0) * nonlinear_R(series.ground_state(), v);
    return eps;
}

StatePair remainder_by_frequency(const FrequencySeries& series, double t, int l) {
    const int order = resolve_order(series, l);
    const std::vector<StatePair> z(series.Z.begin(), series.Z.begin() + order);
    StatePair out = StatePair::zero(series.op->gs->grid);
    for (int n = 2; n <= 3 * order; ++n) {
        out += std::exp(-n * series.e0 * t) * remainder_coefficient(series.ground_state(), z, n);
    }
    return out;
}

double auto_t0(const FrequencySeries& series, double fraction) {
    if (!(fraction > 0.0)) throw ConfigError("auto_t0: fraction must be positive");
    const double target = fraction * h1_norm(series.ground_state().Q);
    auto excess = [&](double t) { return h1_norm(eval_V(series, t)) - target; };
    if (l2_norm(series.Z.front()) == 0.0 && excess(0.0) <= 0.0) {
        // Trivial series (A = 0): every time qualifies; report the origin.
        return 0.0;
    }
    // Scan downward from a time where the leading exponential is certainly
    // small, to the last crossing.
    const double step = 0.05 / series.e0;
    double hi = 0.0;
    while (excess(hi) > 0.0) {
        hi += 1.0 / series.e0;
        if (hi > 200.0 / series.e0) throw NumericError("auto_t0: series norm does not decay");
    }
    double lo = hi;
    while (excess(lo) <= 0.0) {
        lo -= step;
        if (lo < -200.0 / series.e0) return lo;  // the series never exceeds the target
    }
    for (int it = 0; it < 60 && hi - lo > 1e-12; ++it) {
        const double mid = 0.5 * (lo + hi);
        (excess(mid) > 0.0 ? lo : hi) = mid;
    }
    return hi;
}

StatePair initial_data_UA(const FrequencySeries& series, double t0) {
    const GroundState& gs = series.ground_state();
    const StatePair v = eval_V(series, t0);
    const double ratio = h1_norm(v) / h1_norm(gs.Q);
    if (!(ratio <= 0.1)) {
        std::ostringstream msg;
        msg << "initial_data_UA: t0 = " << t0 << " too small (||V(t0)||/||Q|| = " << ratio << " > 0.1)";
        throw ConfigError(msg.str());
    }
    return std::polar(1.0, t0) * (gs.Q + v);
}

double time_shift_TA(double A, double e0) {
    if (A == 0.0) throw ConfigError("time_shift_TA: A must be non-zero");
    if (!(e0 > 0.0)) throw ConfigError("time_shift_TA: e0 must be positive");
    return -std::log(std::abs(A)) / e0;
}

}  // namespace nlslab
