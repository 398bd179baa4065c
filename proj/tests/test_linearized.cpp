// Linearized operators, spectrum, bilinear form, projections.
#include "doctest.h"

#include "nlslab/errors.hpp"
#include "nlslab/linearized.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>

using namespace nlslab;

namespace {

// Smooth random complex pair: a few Gaussians with random centres and coefficients.
StatePair random_pair(const GridPtr& g, std::mt19937_64& rng, bool second = true) {
    std::uniform_real_distribution<double> c(0.0, 6.0), w(0.7, 2.5), a(-1.0, 1.0);
    CVec u = CVec::Zero(g->size()), v = CVec::Zero(g->size());
    for (int k = 0; k < 3; ++k) {
        const RVec bu = (-((g->r().array() - c(rng)) / w(rng)).square()).exp().matrix();
        const RVec bv = (-((g->r().array() - c(rng)) / w(rng)).square()).exp().matrix();
        u += cplx(a(rng), a(rng)) * bu.cast<cplx>();
        if (second) v += cplx(a(rng), a(rng)) * bv.cast<cplx>();
    }
    u(g->size() - 1) = 0.0;
    v(g->size() - 1) = 0.0;
    return StatePair(g, u, v);
}

double max_abs(const StatePair& s) { return std::max(s.u.cwiseAbs().maxCoeff(), s.v.cwiseAbs().maxCoeff()); }

double l2(const StatePair& s) { return std::sqrt(mass(s)); }

struct Fixture {
    GridPtr grid = make_grid(4096, 30.0);
    GroundStatePtr gs = build_ground_state(3.0, Branch::symmetric, grid);
    SectorOperator op0 = assemble_sector(gs, 0);
    SpectralData sd = compute_spectrum(op0);
};

const Fixture& fixture() {
    static const Fixture f;
    return f;
}

}  // namespace

TEST_CASE("sector assembly") {
    const GridPtr g = make_grid(1024, 20.0);
    const GroundStatePtr sym = build_ground_state(3.0, Branch::symmetric, g);
    const GroundStatePtr semi = build_ground_state(0.5, Branch::semi_trivial_first, g);
    for (const auto& gs : {sym, semi}) {
        for (int ell : {0, 1}) {
            const SectorOperator op = assemble_sector(gs, ell);
            CHECK(SpMat(op.LR - SpMat(op.LR.transpose())).coeffs().cwiseAbs().maxCoeff() == 0.0);
            CHECK(SpMat(op.LI - SpMat(op.LI.transpose())).coeffs().cwiseAbs().maxCoeff() == 0.0);
        }
    }
    CHECK_THROWS_AS(assemble_sector(sym, 2), ConfigError);

    // Semi-trivial branch: no coupling between the components.
    const SectorOperator op = assemble_sector(semi, 0);
    double coupling = 0.0;
    for (int k = 0; k < op.LR.outerSize(); ++k) {
        for (SpMat::InnerIterator it(op.LR, k); it; ++it) {
            if ((it.row() % 2) != (it.col() % 2)) coupling = std::max(coupling, std::abs(it.value()));
        }
    }
    CHECK(coupling == 0.0);

    // Symmetric branch: L_R on (f, f) equals the scalar operator 1 - Delta - 3 phi^2 on f.
    std::mt19937_64 rng(5);
    const StatePair f = random_pair(g, rng, false);
    const StatePair ff(g, f.u, f.u);
    const StatePair sym_out = apply_LR(assemble_sector(sym, 0), ff);
    const StatePair scalar_out = apply_LR(op, f);  // first block: 1 - Delta - 3 phi^2
    CHECK((sym_out.u - scalar_out.u).cwiseAbs().maxCoeff() <= 1e-12 * scalar_out.u.cwiseAbs().maxCoeff());
    CHECK((sym_out.v - scalar_out.u).cwiseAbs().maxCoeff() <= 1e-12 * scalar_out.u.cwiseAbs().maxCoeff());
}

TEST_CASE("operator identities at the ground state") {
    const Fixture& fx = fixture();
    const GroundState& gs = *fx.gs;
    const double h2 = gs.grid->h() * gs.grid->h();

    CHECK(max_abs(apply_LI(fx.op0, gs.Q)) <= h2 * max_abs(gs.Q));

    const StatePair lam(gs.grid, scaling_generator(gs.Q.first()).values, scaling_generator(gs.Q.second()).values);
    const StatePair lr_lam = apply_LR(fx.op0, lam);
    CHECK(max_abs(lr_lam + 2.0 * gs.Q) <= h2 * max_abs(gs.Q));

    // Translation kernel lives in the l = 1 sector.
    const SectorOperator op1 = assemble_sector(fx.gs, 1);
    const StatePair dQ(gs.grid, radial_derivative(gs.Q.first()).values, radial_derivative(gs.Q.second()).values);
    // Measured in L^2: the origin node carries an O(h^3) pointwise defect.
    CHECK(l2(apply_LR(op1, dQ)) <= h2 * l2(dQ));

    // Phi(Q) = 1/2 (L_R Q, Q) = -P(Q) with the 1/2 in the definition of B.
    CHECK(std::abs(quadratic_Phi(fx.op0, gs.Q) + gs.P) / gs.P <= 1e-6);
}

TEST_CASE("nonlinear terms") {
    const Fixture& fx = fixture();
    const GroundState& gs = *fx.gs;
    const StatePair zero = StatePair::zero(gs.grid);
    CHECK(max_abs(nonlinear_R(gs, zero)) == 0.0);
    CHECK(max_abs(nonlinear_L(gs, zero)) == 0.0);

    std::mt19937_64 rng(9);
    const StatePair w = random_pair(gs.grid, rng);
    // Exact split of the nonlinearity.
    const StatePair lhs = nonlinearity(gs.Q + w, gs.beta) - nonlinearity(gs.Q, gs.beta);
    const StatePair rhs = nonlinear_L(gs, w) + nonlinear_R(gs, w);
    CHECK(max_abs(lhs - rhs) <= 1e-12 * max_abs(lhs));

    // Quadratic leading order.
    const double r1 = l2(nonlinear_R(gs, 1e-6 * w)), r2 = l2(nonlinear_R(gs, 5e-7 * w));
    CHECK(r1 / r2 == doctest::Approx(4.0).epsilon(1e-3));

    // Semi-trivial branch: the second component of R vanishes when only h is present.
    const GroundStatePtr semi = build_ground_state(0.5, Branch::semi_trivial_first, gs.grid);
    const StatePair only_h(gs.grid, w.u, CVec::Zero(gs.grid->size()));
    CHECK(nonlinear_R(*semi, only_h).v.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("linearized equation against the full flow") {
    // w(t) = e^{-it} s(t) - Q with s an exact NLS solution satisfies dw/dt + Lcal w = i R(w).
    // The full flow is emulated by Taylor expansion: s_t = i (Delta s + N(s)).
    const Fixture& fx = fixture();
    const GroundState& gs = *fx.gs;
    std::mt19937_64 rng(21);
    const StatePair w = 1e-3 * random_pair(gs.grid, rng);
    const StatePair s = gs.Q + w;  // at t = 0
    const StatePair lap(gs.grid, laplacian(s.first()).values, laplacian(s.second()).values);
    const StatePair s_t = cplx(0, 1) * (lap + nonlinearity(s, gs.beta));
    const StatePair w_t = s_t - cplx(0, 1) * s;  // d/dt (e^{-it} s) at t = 0
    const StatePair residual = w_t + apply_script_L(fx.op0, w) - cplx(0, 1) * nonlinear_R(gs, w);
    CHECK(max_abs(residual) <= 1e-4 * max_abs(w));
}

TEST_CASE("unstable eigenpair") {
    const Fixture& fx = fixture();
    const SpectralData& sd = fx.sd;
    CHECK(sd.e0 > 0.0);
    CHECK(sd.eigen_residual <= 1e-6);
    const double y2 = h1_norm_sq(sd.Yplus);
    CHECK(std::abs(sd.phi_plus) <= 1e-6 * y2);
    CHECK(std::abs(sd.phi_minus) <= 1e-6 * y2);
    CHECK(std::abs(quadratic_Phi(fx.op0, sd.Yplus)) <= 1e-6 * y2);
    CHECK(bilinear_B(fx.op0, sd.Yplus, sd.Yminus) == doctest::Approx(1.0).epsilon(1e-10));
    // Y- = -conj(Y+) = (-Y1, Y2).
    CHECK(max_abs(sd.Yminus + sd.Yplus.conj()) == 0.0);
    const StatePair ly = apply_script_L(fx.op0, sd.Yminus);
    CHECK(l2(ly + sd.e0 * sd.Yminus) <= 1e-6 * sd.e0 * l2(sd.Yminus));

    // Remark: L_R Y1 = e0 Y2 and L_I Y2 = -e0 Y1.
    const StatePair y1 = sd.Yplus.real_part(), y2p = sd.Yplus.imag_part();
    CHECK(l2(apply_LR(fx.op0, y1) - sd.e0 * y2p) <= 1e-6 * sd.e0 * l2(y2p));
    CHECK(l2(apply_LI(fx.op0, y2p) + sd.e0 * y1) <= 1e-6 * sd.e0 * l2(y1));
}

TEST_CASE("e0 against a dense eigensolver") {
    const GridPtr g = make_grid(256, 20.0);
    const GroundStatePtr gs = build_ground_state(3.0, Branch::symmetric, g);
    const SectorOperator op = assemble_sector(gs, 0);
    const SpectralData sd = compute_spectrum(op);
    const Eigen::MatrixXd dense = Eigen::MatrixXd(script_L_matrix(op));
    Eigen::EigenSolver<Eigen::MatrixXd> es(dense, false);
    double best = 0.0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        const cplx lam = es.eigenvalues()(i);
        if (std::abs(lam.imag()) < 1e-8) best = std::max(best, lam.real());
    }
    CHECK(sd.e0 == doctest::Approx(best).epsilon(1e-8));
}

TEST_CASE("e0 is independent of the coupling and converged in resolution") {
    const Fixture& fx = fixture();
    const GridPtr g = fx.grid;
    std::vector<std::pair<double, Branch>> cases = {
        {0.5, Branch::semi_trivial_first}, {2.0, Branch::symmetric}, {5.0, Branch::symmetric}};
    for (const auto& [beta, branch] : cases) {
        CAPTURE(beta);
        const GroundStatePtr gs = build_ground_state(beta, branch, g);
        const SpectralData sd = compute_spectrum(assemble_sector(gs, 0));
        CHECK(std::abs(sd.e0 - fx.sd.e0) <= 1e-5);
    }
    const GroundStatePtr fine = build_ground_state(3.0, Branch::symmetric, make_grid(8192, 30.0));
    const SpectralData sd_fine = compute_spectrum(assemble_sector(fine, 0));
    CHECK(std::abs(sd_fine.e0 - fx.sd.e0) / fx.sd.e0 <= 1e-4);
}

TEST_CASE("kernel structure per coupling regime") {
    const Fixture& fx = fixture();
    const KernelReport k0 = kernel_basis(fx.op0);
    CHECK(k0.dim_LI == 2);
    CHECK(k0.dim_LR == 0);
    CHECK(k0.negative_LR == 1);
    CHECK(k0.negative_LI == 0);
    // Eigenvectors of the L_I kernel span (phi, 0), (0, psi).
    const GroundState& gs = *fx.gs;
    for (const auto& b : k0.basis_LI) {
        const double pu = std::abs(inner_real(b, StatePair(gs.grid, gs.Q.u, CVec::Zero(gs.grid->size()))));
        const double pv = std::abs(inner_real(b, StatePair(gs.grid, CVec::Zero(gs.grid->size()), gs.Q.v)));
        const double nq = std::sqrt(mass(gs.Q) / 2.0);
        CHECK(std::hypot(pu, pv) / (nq * l2(b)) == doctest::Approx(1.0).epsilon(1e-6));
    }
    const KernelReport k1 = kernel_basis(assemble_sector(fx.gs, 1));
    CHECK(k1.dim_LR == 1);
    CHECK(k1.dim_LI == 0);

    const GroundStatePtr semi = build_ground_state(0.5, Branch::semi_trivial_first, fx.grid);
    const SectorOperator s0 = assemble_sector(semi, 0);
    const KernelReport ks = kernel_basis(s0);
    CHECK(ks.dim_LI == 1);
    CHECK(ks.dim_LR == 0);
    CHECK(kernel_basis(assemble_sector(semi, 1)).dim_LR == 1);
    // The inactive block 1 - Delta - beta phi^2 >= (1 - beta)(1 - Delta) is positive.
    std::mt19937_64 rng(2);
    for (int k = 0; k < 10; ++k) {
        const StatePair f = random_pair(fx.grid, rng);
        const StatePair fv(fx.grid, CVec::Zero(fx.grid->size()), f.v.real().cast<cplx>());
        const double q = inner_real(apply_LI(s0, fv), fv);
        CHECK(q >= 0.5 * h1_norm_sq(fv) - 1e-10);
    }
}

TEST_CASE("bilinear form") {
    const Fixture& fx = fixture();
    const GroundState& gs = *fx.gs;
    std::mt19937_64 rng(13);
    const StatePair lam(gs.grid, scaling_generator(gs.Q.first()).values, scaling_generator(gs.Q.second()).values);
    for (int k = 0; k < 200; ++k) {
        StatePair a = random_pair(gs.grid, rng), b = random_pair(gs.grid, rng);
        a *= 1.0 / h1_norm(a);
        b *= 1.0 / h1_norm(b);
        CHECK(std::abs(bilinear_B(fx.op0, a, b) - bilinear_B(fx.op0, b, a)) <= 1e-10);
        const double anti = bilinear_B(fx.op0, apply_script_L(fx.op0, a), b) + bilinear_B(fx.op0, a, apply_script_L(fx.op0, b));
        CHECK(std::abs(anti) <= 1e-8);
        if (k < 20) {
            const double lhs = bilinear_B(fx.op0, lam, a);
            const double rhs = -inner_real(gs.Q, a.real_part());
            CHECK(std::abs(lhs - rhs) <= 1e-8);
        }
    }
}

TEST_CASE("orthogonal projections and coercivity") {
    const Fixture& fx = fixture();
    const GroundState& gs = *fx.gs;
    std::mt19937_64 rng(17);
    const CoercivityReport coer = coercivity_report(fx.op0, fx.sd, true);
    CHECK(coer.c > 0.0);
    CHECK(coercivity_estimate(fx.op0, fx.sd) == doctest::Approx(coer.c));
    for (int k = 0; k < 10; ++k) {
        const StatePair s = random_pair(gs.grid, rng);
        for (OrthogonalSpace space : {OrthogonalSpace::Gperp, OrthogonalSpace::Gtilde}) {
            const StatePair p = project_orthogonal(fx.op0, fx.sd, s, space);
            CHECK(orthogonality_residual(fx.op0, fx.sd, p, space) <= 1e-10);
            const StatePair pp = project_orthogonal(fx.op0, fx.sd, p, space);
            CHECK(l2(pp - p) <= 1e-10 * l2(p));
        }
        const StatePair p = project_orthogonal(fx.op0, fx.sd, s, OrthogonalSpace::Gtilde);
        CHECK(quadratic_Phi(fx.op0, p) >= coer.c * h1_norm_sq(p) * (1.0 - 1e-9));
        // Phase conditions are linear: solved exactly.
        const StatePair pg = project_orthogonal(fx.op0, fx.sd, s, OrthogonalSpace::Gperp);
        CHECK(std::abs(inner_real(pg.imag_part(), StatePair(gs.grid, gs.Q.u, CVec::Zero(gs.grid->size())))) <= 1e-12);
    }
    const CoercivityReport open = coercivity_report(fx.op0, fx.sd, false);
    CHECK(open.c < 0.0);
}

TEST_CASE("spectral decomposition") {
    const Fixture& fx = fixture();
    const GroundState& gs = *fx.gs;
    const SpectralProjection py = spectral_project(fx.op0, fx.sd, fx.sd.Yplus);
    CHECK(py.alpha_plus == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(std::abs(py.alpha_minus) <= 1e-8);
    for (double b : py.beta) CHECK(std::abs(b) <= 1e-8);

    for (size_t j = 0; j < fx.sd.kernel.size(); ++j) {
        const SpectralProjection pk = spectral_project(fx.op0, fx.sd, fx.sd.kernel[j]);
        for (size_t i = 0; i < pk.beta.size(); ++i) CHECK(pk.beta[i] == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-8));
        CHECK(std::abs(pk.alpha_plus) <= 1e-8);
    }

    std::mt19937_64 rng(19);
    for (int k = 0; k < 10; ++k) {
        const StatePair w = random_pair(gs.grid, rng);
        const SpectralProjection p = spectral_project(fx.op0, fx.sd, w);
        StatePair rebuilt = p.alpha_plus * fx.sd.Yplus + p.alpha_minus * fx.sd.Yminus + p.remainder;
        for (size_t j = 0; j < p.beta.size(); ++j) rebuilt += p.beta[j] * fx.sd.kernel[j];
        CHECK(l2(rebuilt - w) <= 1e-10 * l2(w));
        CHECK(orthogonality_residual(fx.op0, fx.sd, p.remainder, OrthogonalSpace::Gtilde) <= 1e-10);
        const double phi_w = quadratic_Phi(fx.op0, w);
        CHECK(std::abs(phi_w - quadratic_Phi(fx.op0, p.remainder) - 2.0 * p.alpha_plus * p.alpha_minus) <=
              1e-8 * h1_norm_sq(w));
    }
}
