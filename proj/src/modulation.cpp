#include "nlslab/modulation.hpp"

#include "nlslab/errors.hpp"

#include <cmath>
#include <memory>
#include <numbers>
#include <sstream>

namespace nlslab {

namespace {

// int f g for complex f and real g.
cplx pair_integral(const RadialGrid& g, const CVec& f, const RVec& profile) {
    return {g.integrate(f.real().cwiseProduct(profile)), g.integrate(f.imag().cwiseProduct(profile))};
}

// Newton on F(theta) = Im(e^{-i theta} z), F' = -Re(e^{-i theta} z), keeping
// the root with Re(e^{-i theta} z) > 0.
struct PhaseSolve {
    double theta = 0.0;
    int iterations = 0;
    bool converged = false;
};

PhaseSolve solve_phase(cplx z, double guess) {
    PhaseSolve out;
    const double scale = std::abs(z);
    if (scale == 0.0) return out;  // any phase works; keep 0
    double theta = guess;
    for (int it = 0; it < 50; ++it) {
        const cplx rotated = std::polar(1.0, -theta) * z;
        if (std::abs(rotated.imag()) <= 1e-14 * scale) {
            out.converged = true;
            break;
        }
        theta += rotated.imag() / rotated.real();  // theta - F/F'
        ++out.iterations;
    }
    if (out.converged && (std::polar(1.0, -theta) * z).real() < 0.0) theta += std::numbers::pi;
    out.theta = std::remainder(theta, 2.0 * std::numbers::pi);
    return out;
}

}  // namespace

Modulation modulation_solve(const StatePair& s, const GroundState& gs, double delta0_factor,
                            std::optional<std::pair<double, double>> theta_guess) {
    check_state(s, "modulation_solve");
    check_same_grid(s, gs.Q, "modulation_solve");
    const RadialGrid& g = *s.grid;
    Modulation m;
    m.delta = std::abs(kinetic(s) - gs.K);
    if (!(m.delta < delta0_factor * gs.K)) {
        std::ostringstream msg;
        msg << "modulation_solve: delta = " << m.delta << " is not below delta0 = " << delta0_factor * gs.K;
        throw ConfigError(msg.str());
    }
    const cplx zu = pair_integral(g, s.u, gs.phi);
    const cplx zv = pair_integral(g, s.v, gs.psi);
    const bool symmetric = gs.branch == Branch::symmetric;
    const bool first_carries = gs.branch != Branch::semi_trivial_second;

    PhaseSolve p0, p1;
    if (symmetric) {
        p0 = solve_phase(zu, theta_guess ? theta_guess->first : std::arg(zu));
        p1 = solve_phase(zv, theta_guess ? theta_guess->second : std::arg(zv));
    } else {
        const cplx z = first_carries ? zu : zv;
        p0 = solve_phase(z, theta_guess ? theta_guess->first : std::arg(z));
        p1.converged = true;
    }
    m.theta0 = p0.theta;
    m.theta1 = symmetric ? p1.theta : 0.0;
    m.newton_iterations = p0.iterations + p1.iterations;
    m.converged = p0.converged && p1.converged;

    const double phase_u = m.theta0;
    const double phase_v = symmetric ? m.theta1 : m.theta0;
    const CVec ru = std::polar(1.0, -phase_u) * s.u;
    const CVec rv = std::polar(1.0, -phase_v) * s.v;
    const RVec lap_phi = laplacian(ComplexField::from_real(s.grid, gs.phi)).values.real();
    const RVec lap_psi = laplacian(ComplexField::from_real(s.grid, gs.psi)).values.real();
    const double proj = g.integrate(ru.real().cwiseProduct(lap_phi)) + g.integrate(rv.real().cwiseProduct(lap_psi));
    m.alpha = -proj / gs.K - 1.0;

    m.remainder = StatePair(s.grid, ru - cplx(1.0 + m.alpha, 0.0) * gs.phi.cast<cplx>(),
                            rv - cplx(1.0 + m.alpha, 0.0) * gs.psi.cast<cplx>());

    // Constraint violations relative to the size of the data, so that the
    // residual measures rounding rather than the (small) size of (h, k).
    const CVec& h = m.remainder.u;
    const CVec& k = m.remainder.v;
    const double ns = std::sqrt(mass(s));
    double worst = 0.0;
    if (ns > 0.0) {
        const double np = std::sqrt(g.integrate(gs.phi.cwiseAbs2()));
        const double nq = std::sqrt(g.integrate(gs.psi.cwiseAbs2()));
        if (np > 0.0) worst = std::max(worst, std::abs(pair_integral(g, h, gs.phi).imag()) / (ns * np));
        if (nq > 0.0) worst = std::max(worst, std::abs(pair_integral(g, k, gs.psi).imag()) / (ns * nq));
        const double nlap = std::sqrt(g.integrate(lap_phi.cwiseAbs2()) + g.integrate(lap_psi.cwiseAbs2()));
        const double c = g.integrate(h.real().cwiseProduct(lap_phi)) + g.integrate(k.real().cwiseProduct(lap_psi));
        worst = std::max(worst, std::abs(c) / (ns * nlap));
    }
    m.orthogonality_residual = worst;
    return m;
}

StatePair modulation_reconstruct(const Modulation& m, const GroundState& gs) {
    const bool symmetric = gs.branch == Branch::symmetric;
    const double phase_v = symmetric ? m.theta1 : m.theta0;
    const CVec u = std::polar(1.0, m.theta0) * (cplx(1.0 + m.alpha, 0.0) * gs.phi.cast<cplx>() + m.remainder.u);
    const CVec v = std::polar(1.0, phase_v) * (cplx(1.0 + m.alpha, 0.0) * gs.psi.cast<cplx>() + m.remainder.v);
    return StatePair(gs.grid, u, v);
}

SampleHook modulation_hook(const GroundStatePtr& gs, double delta0_factor) {
    // Successive samples start Newton from the previous phases.
    auto previous = std::make_shared<std::optional<std::pair<double, double>>>();
    return [gs, delta0_factor, previous](const StatePair& s, TrajectorySample& x) {
        if (!(x.delta < delta0_factor * gs->K)) {
            previous->reset();
            return;
        }
        const Modulation m = modulation_solve(s, *gs, delta0_factor, *previous);
        x.alpha = m.alpha;
        x.theta0 = m.theta0;
        x.theta1 = m.theta1;
        x.modulation_converged = m.converged;
        if (m.converged) {
            *previous = std::make_pair(m.theta0, m.theta1);
        } else {
            previous->reset();
            log_warning("modulation: phase iteration did not converge at t = " + std::to_string(x.t));
        }
    };
}

}  // namespace nlslab
