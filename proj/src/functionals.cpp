#include "nlslab/functionals.hpp"

#include "nlslab/errors.hpp"
#include "nlslab/sine_transform.hpp"
#include "nlslab/stencil.hpp"

#include <cmath>
#include <sstream>

namespace nlslab {

namespace {

double kinetic_component(const CVec& f, const RadialGrid& g) {
    const CVec w = f.cwiseProduct(g.r().cast<cplx>());
    const CVec tw = neg_d2(w, g.h());
    return g.w_measure() * (w.conjugate().cwiseProduct(tw)).real().sum();
}

}  // namespace

double mass(const StatePair& s) {
    return s.grid->integrate(s.u.cwiseAbs2() + s.v.cwiseAbs2());
}

double mass(const ComplexField& f) { return f.grid->integrate(f.values.cwiseAbs2()); }

double kinetic(const StatePair& s) {
    return kinetic_component(s.u, *s.grid) + kinetic_component(s.v, *s.grid);
}

double kinetic(const ComplexField& f) { return kinetic_component(f.values, *f.grid); }

double kinetic_spectral(const StatePair& s) {
    const RadialGrid& g = *s.grid;
    const int m = g.size() - 1;  // interior nodes; the wall node is excluded
    const RVec lam = neg_d2_symbol(g.size(), g.h());
    SineTransform dst(m);
    double total = 0.0;
    for (const CVec* comp : {&s.u, &s.v}) {
        CVec w = comp->head(m).cwiseProduct(g.r().head(m).cast<cplx>());
        dst.apply(w);
        total += lam.dot(w.cwiseAbs2());
    }
    return g.w_measure() * total;
}

RVec potential_density(const StatePair& s, double beta) {
    const RVec a = s.u.cwiseAbs2();
    const RVec b = s.v.cwiseAbs2();
    return a.cwiseAbs2() + 2.0 * beta * a.cwiseProduct(b) + b.cwiseAbs2();
}

double potential_P(const StatePair& s, double beta) {
    return s.grid->integrate(potential_density(s, beta));
}

double energy(const StatePair& s, double beta) {
    return 0.5 * kinetic(s) - 0.25 * potential_P(s, beta);
}

std::array<double, 3> momentum(const StatePair&) { return {0.0, 0.0, 0.0}; }

double weinstein_J(const StatePair& s, double beta) {
    const double p = potential_P(s, beta);
    if (!(p > 0.0)) throw NumericError("weinstein_J: P(s) = 0, degenerate input");
    const double m = mass(s);
    const double k = kinetic(s);
    return std::sqrt(m) * std::pow(k, 1.5) / p;
}

double h1_norm_sq(const StatePair& s) { return kinetic(s) + mass(s); }
double h1_norm(const StatePair& s) { return std::sqrt(h1_norm_sq(s)); }

double inner_real(const StatePair& a, const StatePair& b) {
    return a.grid->integrate((a.u.cwiseProduct(b.u.conjugate()) + a.v.cwiseProduct(b.v.conjugate())).real());
}

double me_ratio(const StatePair& s, const ReferenceValues& ref) {
    return mass(s) * energy(s, ref.beta) / (ref.M * ref.E);
}

double mk_ratio(const StatePair& s, const ReferenceValues& ref) {
    return mass(s) * kinetic(s) / (ref.M * ref.K);
}

double delta(const StatePair& s, const ReferenceValues& ref) {
    return std::abs(kinetic(s) - ref.K);
}

cplx sample_radial(const CVec& u, double h, double r) {
    const int n = static_cast<int>(u.size());
    const double x = std::abs(r) / h;  // position in units of h; node j at x = j
    if (x >= n) return 0.0;
    // Value at integer position j (1-based nodes, even extension through 0,
    // odd extension of w = r u through the wall at node n).
    auto value_at = [&](int j) -> cplx {
        if (j >= 1 && j < n) return u[j - 1];
        if (j <= -1 && -j < n) return u[-j - 1];
        if (j == n) return 0.0;
        if (j > n && 2 * n - j >= 1) {
            const int m = 2 * n - j;
            return -u[m - 1] * static_cast<double>(m) / static_cast<double>(j);
        }
        return 0.0;
    };
    int j0 = static_cast<int>(std::floor(x));
    int pos[4];
    if (j0 == 0) {
        pos[0] = -2; pos[1] = -1; pos[2] = 1; pos[3] = 2;
    } else {
        pos[0] = j0 - 1; pos[1] = j0; pos[2] = j0 + 1; pos[3] = j0 + 2;
        if (pos[0] == 0) pos[0] = -1;
    }
    cplx acc = 0.0;
    for (int a = 0; a < 4; ++a) {
        double l = 1.0;
        for (int b = 0; b < 4; ++b) {
            if (b != a) l *= (x - pos[b]) / static_cast<double>(pos[a] - pos[b]);
        }
        acc += l * value_at(pos[a]);
    }
    return acc;
}

StatePair rescale(const StatePair& s, double factor) {
    if (!(factor > 0.0)) throw NumericError("rescale: factor must be positive");
    const RadialGrid& g = *s.grid;
    const int n = g.size();
    StatePair out = StatePair::zero(s.grid);
    for (int i = 0; i < n; ++i) {
        const double rs = factor * g.r()[i];
        out.u[i] = factor * sample_radial(s.u, g.h(), rs);
        out.v[i] = factor * sample_radial(s.v, g.h(), rs);
    }
    if (factor < 1.0) {
        const double cutoff = factor * g.r_max();
        double lost = 0.0;
        for (int i = 0; i < n; ++i) {
            if (g.r()[i] > cutoff) lost += g.weights()[i] * (std::norm(s.u[i]) + std::norm(s.v[i]));
        }
        const double total = mass(s);
        if (total > 0.0 && lost / total > 1e-10) {
            std::ostringstream msg;
            msg << "rescale: discarded tail carries relative mass " << lost / total;
            log_warning(msg.str());
        }
    }
    return out;
}

ComplexField laplacian(const ComplexField& f) {
    const RadialGrid& g = *f.grid;
    const CVec rc = g.r().cast<cplx>();
    const CVec tw = neg_d2(CVec(f.values.cwiseProduct(rc)), g.h());
    return {f.grid, -tw.cwiseQuotient(rc)};
}

ComplexField scaling_generator(const ComplexField& f) {
    const RadialGrid& g = *f.grid;
    const CVec w = f.values.cwiseProduct(g.r().cast<cplx>());
    return {f.grid, d1(w, g.h())};
}

ComplexField radial_derivative(const ComplexField& f) {
    const RadialGrid& g = *f.grid;
    const CVec rc = g.r().cast<cplx>();
    const CVec dw = d1(CVec(f.values.cwiseProduct(rc)), g.h());
    return {f.grid, (dw - f.values).cwiseQuotient(rc)};
}

}  // namespace nlslab
