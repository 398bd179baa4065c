#include "nlslab/ground_state.hpp"

#include "nlslab/errors.hpp"
#include "nlslab/stencil.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace nlslab {

std::string to_string(Branch b) {
    switch (b) {
        case Branch::semi_trivial_first: return "semi_trivial_first";
        case Branch::semi_trivial_second: return "semi_trivial_second";
        case Branch::symmetric: return "symmetric";
    }
    return "unknown";
}

Branch parse_branch(const std::string& name) {
    if (name == "semi_trivial_first" || name == "first") return Branch::semi_trivial_first;
    if (name == "semi_trivial_second" || name == "second") return Branch::semi_trivial_second;
    if (name == "symmetric") return Branch::symmetric;
    throw ConfigError("unknown branch '" + name +
                      "' (expected semi_trivial_first, semi_trivial_second or symmetric)");
}

void validate_branch(double beta, Branch branch) {
    if (!(beta > 0.0) || !std::isfinite(beta)) {
        throw ConfigError("beta must be a positive finite coupling");
    }
    if (beta == 1.0) {
        throw ConfigError("beta = 1 is the degenerate case (a continuum of ground states); "
                          "choose 0 < beta < 1 or beta > 1");
    }
    if (branch == Branch::symmetric && beta < 1.0) {
        throw ConfigError("branch 'symmetric' requires beta > 1; for 0 < beta < 1 the ground "
                          "states are semi-trivial");
    }
    if (branch != Branch::symmetric && beta > 1.0) {
        throw ConfigError("semi-trivial branches require 0 < beta < 1; for beta > 1 use "
                          "branch 'symmetric'");
    }
}

namespace {

enum class Shot { undershoot, overshoot };

// y'' = -(2/r) y' + y - y^3 integrated from the regular series at the origin.
struct RadialOde {
    static void rhs(double r, double y, double yp, double& dy, double& dyp) {
        dy = yp;
        dyp = -2.0 * yp / r + y - y * y * y;
    }

    // One RK4 step.
    static void step(double r, double dr, double& y, double& yp) {
        double k1, l1, k2, l2, k3, l3, k4, l4;
        rhs(r, y, yp, k1, l1);
        rhs(r + 0.5 * dr, y + 0.5 * dr * k1, yp + 0.5 * dr * l1, k2, l2);
        rhs(r + 0.5 * dr, y + 0.5 * dr * k2, yp + 0.5 * dr * l2, k3, l3);
        rhs(r + dr, y + dr * k3, yp + dr * l3, k4, l4);
        y += dr / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
        yp += dr / 6.0 * (l1 + 2 * l2 + 2 * l3 + l4);
    }

    static void start(double a, double r0, double& y, double& yp) {
        const double c = (a - a * a * a) / 6.0;
        y = a + c * r0 * r0;
        yp = 2.0 * c * r0;
    }
};

// Integrates with a step that lands on every grid node; calls visit(r, y)
// at nodes. Returns the classification; a trajectory that neither crosses
// zero nor turns upward inside the window counts as an undershoot.
template <class Visit>
Shot integrate(double a, double h, double window, int substeps, Visit&& visit) {
    const double dr = h / substeps;
    double r = 0.5 * dr;
    double y, yp;
    RadialOde::start(a, r, y, yp);
    // First half-step brings us to r = dr; then uniform steps.
    RadialOde::step(r, 0.5 * dr, y, yp);
    r = dr;
    int k = 1;
    while (r < window) {
        if (k % substeps == 0) visit(r, y);
        if (y < 0.0) return Shot::overshoot;
        if (yp > 0.0) return Shot::undershoot;
        RadialOde::step(r, dr, y, yp);
        ++k;
        r = k * dr;
    }
    return Shot::undershoot;
}

double ode_residual(const RVec& phi, const RadialGrid& g) {
    const RVec w = phi.cwiseProduct(g.r());
    const RVec tw = neg_d2(w, g.h());
    // phi'' + (2/r) phi' = -(T w)/r.
    RVec res = -tw.cwiseQuotient(g.r()) - phi + phi.cwiseProduct(phi).cwiseProduct(phi);
    return res.cwiseAbs().maxCoeff();
}

}  // namespace

ScalarProfile shoot_scalar_profile(const GridPtr& grid, double tol) {
    if (!(tol > 0.0 && tol <= 1e-6)) throw ConfigError("shoot_scalar_profile: tol must be in (0, 1e-6]");
    const RadialGrid& g = *grid;
    const int n = g.size();
    const double window = 0.6 * g.r_max();
    if (window < 6.0) {
        throw NumericError("shoot_scalar_profile: r_max too small for the shooting window "
                           "(need 0.6 r_max >= 6)");
    }
    const int substeps = std::max(1, static_cast<int>(std::ceil(g.h() / 0.005)));
    auto noop = [](double, double) {};

    double lo = 1.0, hi = 10.0;
    if (integrate(lo, g.h(), window, substeps, noop) != Shot::undershoot ||
        integrate(hi, g.h(), window, substeps, noop) != Shot::overshoot) {
        throw NumericError("shoot_scalar_profile: bisection bracket [1, 10] does not straddle "
                           "the ground state; check grid/window configuration");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (integrate(mid, g.h(), window, substeps, noop) == Shot::overshoot) hi = mid;
        else lo = mid;
    }
    const double a = 0.5 * (lo + hi);

    // Sample the shot on the grid up to the matching radius; the shot stays
    // accurate while the bisection error e^{r} stays below ~1e-6 of e^{-r}.
    const double match = std::min(window, 8.0);
    RVec phi = RVec::Zero(n);
    integrate(a, g.h(), match + g.h(), substeps, [&](double r, double y) {
        const int i = static_cast<int>(std::lround(r / g.h())) - 1;
        if (i >= 0 && i < n) phi[i] = y;
    });
    int im = std::min(n - 1, static_cast<int>(std::lround(match / g.h())) - 1);
    while (im > 0 && !(phi[im] > 0.0)) --im;
    const double rm = g.r()[im];
    for (int i = im + 1; i < n; ++i) {
        const double r = g.r()[i];
        phi[i] = phi[im] * (rm / r) * std::exp(-(r - rm));
    }

    // Newton on T w + w - w^3/r^2 = 0 (w = r phi).
    RVec w = phi.cwiseProduct(g.r());
    const Eigen::SparseMatrix<double> t = neg_d2_matrix(n, g.h());
    const RVec r2 = g.r().cwiseProduct(g.r());
    int iters = 0;
    double last_step = std::numeric_limits<double>::infinity();
    for (; iters < 40; ++iters) {
        const RVec u = w.cwiseQuotient(g.r());
        const RVec f = t * w + w - w.cwiseProduct(u).cwiseProduct(u);
        Eigen::SparseMatrix<double> jac = t;
        for (int i = 0; i < n; ++i) jac.coeffRef(i, i) += 1.0 - 3.0 * w[i] * w[i] / r2[i];
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(jac);
        if (lu.info() != Eigen::Success) throw NumericError("shoot_scalar_profile: Newton Jacobian singular");
        const RVec dw = lu.solve(-f);
        w += dw;
        // Stop once the update reaches the roundoff floor or stops shrinking.
        const double step = dw.cwiseAbs().maxCoeff();
        if (step <= 1e-14 * w.cwiseAbs().maxCoeff() || (step < 1e-10 && step >= 0.5 * last_step)) {
            ++iters;
            break;
        }
        last_step = step;
    }
    phi = w.cwiseQuotient(g.r());

    ScalarProfile out;
    out.field = ComplexField::from_real(grid, phi);
    out.phi0 = a;
    out.match_radius = rm;
    out.newton_iterations = iters;
    out.ode_residual = ode_residual(phi, g);

    const double scale = phi.cwiseAbs().maxCoeff();
    if (!(out.ode_residual <= tol * scale)) {
        std::ostringstream msg;
        msg << "shoot_scalar_profile: ODE residual " << out.ode_residual << " exceeds tol*max|phi| = "
            << tol * scale;
        throw NumericError(msg.str());
    }
    const double slack = 1e-14 * scale;
    for (int i = 0; i < n; ++i) {
        if (phi[i] < -slack) throw NumericError("shoot_scalar_profile: profile not positive");
        if (i > 0 && phi[i] > phi[i - 1] + slack) {
            throw NumericError("shoot_scalar_profile: profile not radially non-increasing");
        }
    }
    return out;
}

GroundStatePtr build_ground_state(double beta, Branch branch, const GridPtr& grid, double tol) {
    validate_branch(beta, branch);
    auto gs = std::make_shared<GroundState>();
    gs->beta = beta;
    gs->branch = branch;
    gs->grid = grid;
    gs->scalar = shoot_scalar_profile(grid, tol);
    const RVec phi = gs->scalar.field.values.real();
    const int n = grid->size();
    switch (branch) {
        case Branch::semi_trivial_first:
            gs->phi = phi;
            gs->psi = RVec::Zero(n);
            break;
        case Branch::semi_trivial_second:
            gs->phi = RVec::Zero(n);
            gs->psi = phi;
            break;
        case Branch::symmetric:
            gs->phi = phi / std::sqrt(1.0 + beta);
            gs->psi = gs->phi;
            break;
    }
    gs->Q = StatePair::from_real(grid, gs->phi, gs->psi);
    gs->M = mass(gs->Q);
    gs->K = kinetic(gs->Q);
    gs->P = potential_P(gs->Q, beta);
    gs->E = 0.5 * gs->K - 0.25 * gs->P;
    gs->c_gn = 4.0 / (3.0 * std::sqrt(gs->M * gs->K));
    return gs;
}

std::pair<double, double> pohozaev_residuals(const GroundState& gs) {
    return {std::abs(gs.K - 3.0 * gs.M) / gs.K, std::abs(gs.P - 4.0 * gs.M) / gs.P};
}

GnConstants gn_constant_forms(const GroundState& gs) {
    GnConstants c;
    c.from_mk = 4.0 / (3.0 * std::sqrt(gs.M) * std::sqrt(gs.K));
    c.from_me = 4.0 / (3.0 * std::sqrt(6.0) * std::sqrt(gs.M) * std::sqrt(gs.E));
    c.relative_gap = std::abs(c.from_mk - c.from_me) / c.from_mk;
    return c;
}

double sharp_gn_constant(const GroundState& gs) {
    const GnConstants c = gn_constant_forms(gs);
    if (c.relative_gap > 1e-8) {
        std::ostringstream msg;
        msg << "sharp_gn_constant: forms disagree by " << c.relative_gap
            << " (inconsistent ground state)";
        throw NumericError(msg.str());
    }
    return c.from_mk;
}

}  // namespace nlslab
