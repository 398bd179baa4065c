#include "nlslab/virial.hpp"

#include "nlslab/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

namespace nlslab {

namespace {

constexpr int kGauss = 8;

struct GaussRule {
    std::array<double, kGauss> x{}, w{};  // on [-1, 1]
};

// Golub-Welsch: nodes are eigenvalues of the Jacobi matrix of the Legendre recurrence.
const GaussRule& gauss_rule() {
    static const GaussRule rule = [] {
        Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(kGauss, kGauss);
        for (int k = 1; k < kGauss; ++k) {
            const double b = k / std::sqrt(4.0 * k * k - 1.0);
            jac(k, k - 1) = jac(k - 1, k) = b;
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
        GaussRule g;
        for (int k = 0; k < kGauss; ++k) {
            g.x[k] = es.eigenvalues()(k);
            g.w[k] = 2.0 * es.eigenvectors()(0, k) * es.eigenvectors()(0, k);
        }
        return g;
    }();
    return rule;
}

// Integral of fn over [lo, hi] split at the plateau breakpoints; fn is a
// polynomial of degree <= 10 on each piece, so the rule is exact.
template <typename F>
double piecewise_integral(double lo, double hi, F&& fn) {
    static constexpr double kBreaks[] = {0.0, 0.2, 0.3, 0.5, 1.0};
    const GaussRule& g = gauss_rule();
    double total = 0.0;
    for (int p = 0; p + 1 < 5; ++p) {
        const double a = std::max(lo, kBreaks[p]);
        const double b = std::min(hi, kBreaks[p + 1]);
        if (b <= a) continue;
        const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        for (int k = 0; k < kGauss; ++k) total += half * g.w[k] * fn(mid + half * g.x[k]);
    }
    return total;
}

// Septic smoothstep (C^3 at both ends) and its first two derivatives.
std::array<double, 3> smoothstep(double x) {
    if (x <= 0.0) return {0.0, 0.0, 0.0};
    if (x >= 1.0) return {1.0, 0.0, 0.0};
    const double x2 = x * x, x3 = x2 * x, y = 1.0 - x;
    return {x3 * x * (35.0 - 84.0 * x + 70.0 * x2 - 20.0 * x3), 140.0 * x3 * y * y * y,
            420.0 * x2 * y * y * (1.0 - 2.0 * x)};
}

// 256 (y(1-y))^4 on [0, 1] (peak 1, four vanishing derivatives at the ends).
std::array<double, 3> bump(double y) {
    if (y <= 0.0 || y >= 1.0) return {0.0, 0.0, 0.0};
    const double p = y * (1.0 - y), q = 1.0 - 2.0 * y;
    return {256.0 * p * p * p * p, 1024.0 * p * p * p * q, 1024.0 * (3.0 * p * p * q * q - 2.0 * p * p * p)};
}

struct PlateauParts {
    std::array<double, 3> step, b1, b2;  // value and d/ds, d2/ds2
};

PlateauParts plateau_parts(double s) {
    PlateauParts out;
    const auto st = smoothstep((s - 0.2) / 0.8);
    const auto p1 = bump(s / 0.3);
    const auto p2 = bump((s - 0.5) / 0.5);
    out.step = {2.0 * st[0], 2.0 * st[1] / 0.8, 2.0 * st[2] / 0.64};
    out.b1 = {p1[0], p1[1] / 0.3, p1[2] / 0.09};
    out.b2 = {p2[0], p2[1] / 0.5, p2[2] / 0.25};
    return out;
}

void validate_radius(double R) {
    if (!(R > 0.0) || !std::isfinite(R)) throw ConfigError("virial weight: R must be positive and finite");
}

}  // namespace

std::string to_string(WeightMode m) {
    switch (m) {
        case WeightMode::plateau_quadratic: return "plateau_quadratic";
        case WeightMode::capped: return "capped";
        case WeightMode::exact_quadratic: return "exact_quadratic";
    }
    return "unknown";
}

WeightMode parse_weight_mode(const std::string& name) {
    if (name == "plateau_quadratic" || name == "plateau") return WeightMode::plateau_quadratic;
    if (name == "capped") return WeightMode::capped;
    if (name == "exact_quadratic" || name == "exact") return WeightMode::exact_quadratic;
    throw ConfigError("unknown weight mode '" + name + "' (expected plateau_quadratic, capped, exact_quadratic)");
}

VirialWeight::VirialWeight(WeightMode mode, double R) : mode_(mode), R_(R) {
    validate_radius(R);
    if (mode == WeightMode::plateau_quadratic) {
        // int_0^1 f = 3 and int_0^1 (1 - t) f = 9/4 make a'(3R) = a(3R) = 0.
        auto moment = [](int which, int weight) {
            return piecewise_integral(0.0, 1.0, [&](double t) {
                const PlateauParts p = plateau_parts(t);
                const double v = which == 0 ? p.step[0] : which == 1 ? p.b1[0] : p.b2[0];
                return weight == 0 ? v : (1.0 - t) * v;
            });
        };
        Eigen::Matrix2d m;
        m << moment(1, 0), moment(2, 0), moment(1, 1), moment(2, 1);
        const Eigen::Vector2d rhs(3.0 - moment(0, 0), 2.25 - moment(0, 1));
        const Eigen::Vector2d c = m.fullPivLu().solve(rhs);
        c1_ = c(0);
        c2_ = c(1);
    } else if (mode == WeightMode::capped) {
        // p(s) / R^2 on [0, 1] with (p, p', p'', p''', p'''') = (1, 4, 8, 0, 0) at 0
        // and (2, 0, 0, 0, 0) at 1 (derivatives in s = (r - R) / (2R)).
        Eigen::Matrix<double, 10, 10> m = Eigen::Matrix<double, 10, 10>::Zero();
        Eigen::Matrix<double, 10, 1> rhs;
        rhs << 1.0, 4.0, 8.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 0.0;
        for (int d = 0; d < 5; ++d) {
            for (int k = d; k < 10; ++k) {
                double falling = 1.0;
                for (int j = 0; j < d; ++j) falling *= (k - j);
                if (k == d) m(d, k) = falling;  // at s = 0 only s^d survives
                m(5 + d, k) = falling;          // at s = 1
            }
        }
        const Eigen::Matrix<double, 10, 1> c = m.fullPivLu().solve(rhs);
        for (int k = 0; k < 10; ++k) hermite_[k] = c(k);
    }
}

WeightJet VirialWeight::jet(double r) const {
    WeightJet j;
    const double R = R_;
    if (mode_ == WeightMode::exact_quadratic || r <= R) {
        j.a = r * r;
        j.a1 = 2.0 * r;
        j.a2 = 2.0;
        return j;
    }
    const double s = (r - R) / (2.0 * R);
    if (s >= 1.0) {
        if (mode_ == WeightMode::capped) j.a = 2.0 * R * R;
        return j;
    }
    if (mode_ == WeightMode::capped) {
        double d[5] = {0.0, 0.0, 0.0, 0.0, 0.0};
        for (int k = 9; k >= 0; --k) {
            // Horner for the value and the first four derivatives at once.
            for (int m = 4; m >= 1; --m) d[m] = d[m] * s + d[m - 1];
            d[0] = d[0] * s + hermite_[k];
        }
        // d[m] holds p^{(m)}(s) / m!.
        const double R2 = R * R;
        j.a = R2 * d[0];
        j.a1 = R2 * d[1] / (2.0 * R);
        j.a2 = R2 * 2.0 * d[2] / (4.0 * R2);
        j.a3 = R2 * 6.0 * d[3] / (8.0 * R2 * R);
        j.a4 = R2 * 24.0 * d[4] / (16.0 * R2 * R2);
        return j;
    }
    auto f_at = [&](double t) {
        const PlateauParts p = plateau_parts(t);
        return std::array<double, 3>{p.step[0] + c1_ * p.b1[0] + c2_ * p.b2[0],
                                     p.step[1] + c1_ * p.b1[1] + c2_ * p.b2[1],
                                     p.step[2] + c1_ * p.b1[2] + c2_ * p.b2[2]};
    };
    const auto f = f_at(s);
    const double i0 = piecewise_integral(0.0, s, [&](double t) { return f_at(t)[0]; });
    const double i1 = piecewise_integral(0.0, s, [&](double t) { return (s - t) * f_at(t)[0]; });
    j.a = R * R * (1.0 + 4.0 * s + 4.0 * (s * s - i1));
    j.a1 = 2.0 * R * (1.0 + 2.0 * s - i0);
    j.a2 = 2.0 - f[0];
    j.a3 = -f[1] / (2.0 * R);
    j.a4 = -f[2] / (4.0 * R * R);
    return j;
}

double VirialWeight::max_a2(const RadialGrid& g) const {
    double m = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < g.size(); ++i) m = std::max(m, jet(g.r()(i)).a2);
    return m;
}

double VirialWeight::gradient_constant(const RadialGrid& g) const {
    double c = 0.0;
    for (int i = 0; i < g.size(); ++i) {
        const WeightJet j = jet(g.r()(i));
        if (j.a > 1e-12 * R_ * R_) c = std::max(c, j.a1 * j.a1 / j.a);
    }
    return c;
}

SampledWeight sample_weight(const VirialWeight& w, const RadialGrid& g) {
    if (w.mode() != WeightMode::exact_quadratic && 3.0 * w.R() > g.r_max()) {
        std::ostringstream msg;
        msg << "virial weight: transition region [R, 3R] = [" << w.R() << ", " << 3.0 * w.R()
            << "] exceeds r_max = " << g.r_max();
        throw ConfigError(msg.str());
    }
    const int n = g.size();
    SampledWeight out{RVec(n), RVec(n), RVec(n), RVec(n), RVec(n)};
    for (int i = 0; i < n; ++i) {
        const double r = g.r()(i);
        const WeightJet j = w.jet(r);
        out.a(i) = j.a;
        out.a1(i) = j.a1;
        out.a2(i) = j.a2;
        out.lap(i) = j.a2 + 2.0 * j.a1 / r;
        out.bilap(i) = j.a4 + 4.0 * j.a3 / r;
    }
    return out;
}

namespace {

struct Densities {
    RVec mass;       // |u|^2 + |v|^2
    RVec grad;       // |u_r|^2 + |v_r|^2
    RVec current;    // Im(u_r conj u + v_r conj v)
    RVec potential;  // |u|^4 + 2 beta |uv|^2 + |v|^4
};

Densities densities(const StatePair& s, double beta) {
    const ComplexField ur = radial_derivative(s.first());
    const ComplexField vr = radial_derivative(s.second());
    Densities d;
    d.mass = s.u.cwiseAbs2() + s.v.cwiseAbs2();
    d.grad = ur.values.cwiseAbs2() + vr.values.cwiseAbs2();
    d.current = (ur.values.array() * s.u.conjugate().array() + vr.values.array() * s.v.conjugate().array())
                    .imag()
                    .matrix();
    d.potential = potential_density(s, beta);
    return d;
}

}  // namespace

double virial_V(const StatePair& s, const VirialWeight& w) {
    check_state(s, "virial_V");
    const SampledWeight sw = sample_weight(w, *s.grid);
    return s.grid->integrate(sw.a.cwiseProduct(s.u.cwiseAbs2() + s.v.cwiseAbs2()));
}

double virial_Vprime(const StatePair& s, const VirialWeight& w) {
    check_state(s, "virial_Vprime");
    const SampledWeight sw = sample_weight(w, *s.grid);
    const Densities d = densities(s, 0.0);
    return 2.0 * s.grid->integrate(sw.a1.cwiseProduct(d.current));
}

double virial_AR(const StatePair& s, const VirialWeight& w, double beta) {
    check_state(s, "virial_AR");
    const SampledWeight sw = sample_weight(w, *s.grid);
    const Densities d = densities(s, beta);
    const RVec two = RVec::Constant(s.size(), 2.0), six = RVec::Constant(s.size(), 6.0);
    const RadialGrid& g = *s.grid;
    return 4.0 * g.integrate((sw.a2 - two).cwiseProduct(d.grad)) - g.integrate(sw.bilap.cwiseProduct(d.mass)) -
           g.integrate((sw.lap - six).cwiseProduct(d.potential));
}

double virial_Vsecond(const StatePair& s, const VirialWeight& w, double beta) {
    check_state(s, "virial_Vsecond");
    const SampledWeight sw = sample_weight(w, *s.grid);
    const Densities d = densities(s, beta);
    const RadialGrid& g = *s.grid;
    return 4.0 * g.integrate(sw.a2.cwiseProduct(d.grad)) - g.integrate(sw.bilap.cwiseProduct(d.mass)) -
           g.integrate(sw.lap.cwiseProduct(d.potential));
}

double second_virial(const StatePair& s, const VirialWeight& w, const GroundState& gs, VirialRegime regime) {
    const double K = kinetic(s);
    const double slack = 1e-10 * gs.K;
    if (regime == VirialRegime::high && K < gs.K - slack) {
        throw ConfigError("second_virial: high-kinetic regime requested but K(s) < K(Q)");
    }
    if (regime == VirialRegime::low && K > gs.K + slack) {
        throw ConfigError("second_virial: low-kinetic regime requested but K(s) > K(Q)");
    }
    const double d = std::abs(K - gs.K);
    const double ar = virial_AR(s, w, gs.beta);
    return (regime == VirialRegime::high ? -4.0 * d : 4.0 * d) + ar;
}

BanicaGap banica_gap(const StatePair& s, const VirialWeight& w, const GroundState& gs, double tol) {
    check_state(s, "banica_gap");
    const double M = mass(s), E = energy(s, gs.beta);
    if (std::abs(M - gs.M) > tol * gs.M || std::abs(E - gs.E) > tol * gs.E) {
        std::ostringstream msg;
        msg << "banica_gap: state is off the threshold (M - M(Q) = " << M - gs.M << ", E - E(Q) = " << E - gs.E
            << ")";
        throw ConfigError(msg.str());
    }
    const SampledWeight sw = sample_weight(w, *s.grid);
    const Densities d = densities(s, gs.beta);
    const RadialGrid& g = *s.grid;
    BanicaGap out;
    const double current = g.integrate(sw.a1.cwiseProduct(d.current));
    out.lhs = current * current;
    out.delta = std::abs(kinetic(s) - gs.K);
    out.rhs = out.delta * out.delta * g.integrate(sw.a1.cwiseAbs2().cwiseProduct(d.mass));
    out.ratio = out.rhs > 0.0 ? out.lhs / out.rhs : (out.lhs > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    const double P = potential_P(s, gs.beta);
    out.gn_deficit = kinetic(s) - std::pow(P / (gs.c_gn * std::sqrt(M)), 2.0 / 3.0);
    return out;
}

StatePair threshold_phase_family(const GroundState& gs, const VirialWeight& w, double eps, bool upper) {
    const GridPtr& grid = gs.grid;
    const RadialGrid& g = *grid;
    const double h = g.h();
    auto build = [&](double lambda) {
        StatePair out = StatePair::zero(grid);
        const double amp = std::pow(lambda, 1.5);
        for (int i = 0; i < g.size() - 1; ++i) {
            const double x = lambda * g.r()(i);
            const cplx phase = std::polar(amp, eps * w.jet(x).a);
            out.u[i] = phase * sample_radial(gs.Q.u, h, x);
            out.v[i] = phase * sample_radial(gs.Q.v, h, x);
        }
        out *= cplx(std::sqrt(gs.M / mass(out)), 0.0);
        return out;
    };
    auto excess = [&](double lambda) { return energy(build(lambda), gs.beta) - gs.E; };

    const StatePair base = build(1.0);
    const double lam_star = 4.0 * kinetic(base) / (3.0 * potential_P(base, gs.beta));
    double lo = upper ? lam_star : 0.25 * lam_star;
    double hi = upper ? 2.0 * lam_star : lam_star;
    double f_lo = excess(lo), f_hi = excess(hi);
    if (!(f_lo * f_hi < 0.0)) {
        throw NumericError("threshold_phase_family: energy level E(Q) is not bracketed (eps too small?)");
    }
    for (int it = 0; it < 100 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = excess(mid);
        if ((fm < 0.0) == (f_lo < 0.0)) {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
            f_hi = fm;
        }
    }
    return build(0.5 * (lo + hi));
}

}  // namespace nlslab
