#include "nlslab/linearized.hpp"

#include "nlslab/errors.hpp"
#include "nlslab/stencil.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace nlslab {

namespace {

using Trip = Eigen::Triplet<double>;

SpMat interleave_block(const SpMat& t, const RVec& diag0, const RVec& diag1, const RVec& offdiag) {
    const int n = static_cast<int>(t.rows());
    std::vector<Trip> trips;
    trips.reserve(static_cast<size_t>(2 * t.nonZeros() + 4 * n));
    for (int k = 0; k < t.outerSize(); ++k) {
        for (SpMat::InnerIterator it(t, k); it; ++it) {
            trips.emplace_back(2 * it.row(), 2 * it.col(), it.value());
            trips.emplace_back(2 * it.row() + 1, 2 * it.col() + 1, it.value());
        }
    }
    for (int i = 0; i < n; ++i) {
        trips.emplace_back(2 * i, 2 * i, diag0[i]);
        trips.emplace_back(2 * i + 1, 2 * i + 1, diag1[i]);
        if (offdiag[i] != 0.0) {
            trips.emplace_back(2 * i, 2 * i + 1, offdiag[i]);
            trips.emplace_back(2 * i + 1, 2 * i, offdiag[i]);
        }
    }
    SpMat m(2 * n, 2 * n);
    m.setFromTriplets(trips.begin(), trips.end());
    return m;
}

// Interleaved w-representation of a real profile pair.
RVec pack_profiles(const RadialGrid& g, const RVec& a, const RVec& b) {
    const int n = g.size();
    RVec x(2 * n);
    for (int i = 0; i < n; ++i) {
        x[2 * i] = g.r()[i] * a[i];
        x[2 * i + 1] = g.r()[i] * b[i];
    }
    return x;
}

double inner_w(const SectorOperator& op, const StatePair& a, const StatePair& b) {
    return op.measure * (pack_real(a).dot(pack_real(b)) + pack_imag(a).dot(pack_imag(b)));
}

// Constraint vectors on the stacked [Re (2N); Im (2N)] representation.
std::vector<RVec> constraint_vectors(const SectorOperator& op, const SpectralData& sd,
                                     OrthogonalSpace space) {
    const GroundState& gs = *op.gs;
    const RadialGrid& g = *gs.grid;
    const int n2 = 2 * g.size();
    std::vector<RVec> cs;
    const RVec zero = RVec::Zero(g.size());
    if (gs.phi.cwiseAbs().maxCoeff() > 0.0) {
        RVec c = RVec::Zero(2 * n2);
        c.tail(n2) = pack_profiles(g, gs.phi, zero);
        cs.push_back(c);
    }
    if (gs.psi.cwiseAbs().maxCoeff() > 0.0) {
        RVec c = RVec::Zero(2 * n2);
        c.tail(n2) = pack_profiles(g, zero, gs.psi);
        cs.push_back(c);
    }
    if (space == OrthogonalSpace::Gperp) {
        // r * Delta Q = -(T w_Q) = -(H - 1) w_Q.
        const RVec qw = pack_profiles(g, gs.phi, gs.psi);
        RVec c = RVec::Zero(2 * n2);
        c.head(n2) = -(op.H * qw - qw);
        cs.push_back(c);
    } else {
        RVec c1 = RVec::Zero(2 * n2);
        c1.head(n2) = sd.Y2w;
        cs.push_back(c1);
        RVec c2 = RVec::Zero(2 * n2);
        c2.tail(n2) = sd.Y1w;
        cs.push_back(c2);
    }
    return cs;
}

RVec stack(const StatePair& s) {
    const RVec re = pack_real(s);
    const RVec im = pack_imag(s);
    RVec x(re.size() + im.size());
    x << re, im;
    return x;
}

StatePair unstack(const GridPtr& grid, const RVec& x) {
    const int n2 = static_cast<int>(x.size() / 2);
    return unpack(grid, x.head(n2), x.tail(n2));
}

}  // namespace

SectorOperator assemble_sector(const GroundStatePtr& gs, int ell) {
    if (ell != 0 && ell != 1) throw ConfigError("assemble_sector: ell must be 0 or 1");
    const RadialGrid& g = *gs->grid;
    const int n = g.size();
    const double beta = gs->beta;
    SpMat t = neg_d2_matrix(n, g.h(), ell == 0 ? Parity::odd : Parity::even);
    if (ell == 1) {
        for (int i = 0; i < n; ++i) t.coeffRef(i, i) += 2.0 / (g.r()[i] * g.r()[i]);
    }
    const RVec p2 = gs->phi.cwiseAbs2();
    const RVec q2 = gs->psi.cwiseAbs2();
    const RVec pq = gs->phi.cwiseProduct(gs->psi);
    const RVec ones = RVec::Ones(n);

    SectorOperator op;
    op.gs = gs;
    op.ell = ell;
    op.measure = g.w_measure();
    op.LR = interleave_block(t, ones - 3.0 * p2 - beta * q2, ones - 3.0 * q2 - beta * p2, -2.0 * beta * pq);
    op.LI = interleave_block(t, ones - p2 - beta * q2, ones - q2 - beta * p2, RVec::Zero(n));
    op.H = interleave_block(t, ones, ones, RVec::Zero(n));
    return op;
}

RVec pack_real(const StatePair& s) {
    const RadialGrid& g = *s.grid;
    return pack_profiles(g, s.u.real(), s.v.real());
}

RVec pack_imag(const StatePair& s) {
    const RadialGrid& g = *s.grid;
    return pack_profiles(g, s.u.imag(), s.v.imag());
}

StatePair unpack(const GridPtr& grid, const RVec& re, const RVec& im) {
    const int n = grid->size();
    StatePair s = StatePair::zero(grid);
    for (int i = 0; i < n; ++i) {
        const double inv_r = 1.0 / grid->r()[i];
        s.u[i] = cplx(re[2 * i], im[2 * i]) * inv_r;
        s.v[i] = cplx(re[2 * i + 1], im[2 * i + 1]) * inv_r;
    }
    return s;
}

StatePair apply_LR(const SectorOperator& op, const StatePair& s) {
    return unpack(s.grid, op.LR * pack_real(s), op.LR * pack_imag(s));
}

StatePair apply_LI(const SectorOperator& op, const StatePair& s) {
    return unpack(s.grid, op.LI * pack_real(s), op.LI * pack_imag(s));
}

StatePair apply_script_L(const SectorOperator& op, const StatePair& s) {
    return unpack(s.grid, -(op.LI * pack_imag(s)), op.LR * pack_real(s));
}

SpMat script_L_matrix(const SectorOperator& op) {
    const int n2 = static_cast<int>(op.LR.rows());
    std::vector<Trip> trips;
    trips.reserve(static_cast<size_t>(op.LR.nonZeros() + op.LI.nonZeros()));
    for (int k = 0; k < op.LI.outerSize(); ++k)
        for (SpMat::InnerIterator it(op.LI, k); it; ++it) trips.emplace_back(it.row(), n2 + it.col(), -it.value());
    for (int k = 0; k < op.LR.outerSize(); ++k)
        for (SpMat::InnerIterator it(op.LR, k); it; ++it) trips.emplace_back(n2 + it.row(), it.col(), it.value());
    SpMat m(2 * n2, 2 * n2);
    m.setFromTriplets(trips.begin(), trips.end());
    return m;
}

namespace {

// Stacked index [Re (2N); Im (2N)] -> fully interleaved index 4i + 2*block + c,
// which keeps the shifted block operator banded.
int banded_index(int j, int n2) {
    const int block = j >= n2 ? 1 : 0;
    const int k = j - block * n2;
    return 4 * (k / 2) + 2 * block + (k % 2);
}

}  // namespace

ShiftedLcalSolver::ShiftedLcalSolver(const SectorOperator& op, double sigma) : sigma_(sigma) {
    const SpMat lmat = script_L_matrix(op);
    const int n4 = static_cast<int>(lmat.rows());
    const int n2 = n4 / 2;
    std::vector<Trip> trips;
    trips.reserve(static_cast<size_t>(lmat.nonZeros() + n4));
    for (int k = 0; k < lmat.outerSize(); ++k)
        for (SpMat::InnerIterator it(lmat, k); it; ++it)
            trips.emplace_back(banded_index(static_cast<int>(it.row()), n2),
                               banded_index(static_cast<int>(it.col()), n2), it.value());
    for (int i = 0; i < n4; ++i) trips.emplace_back(i, i, -sigma);
    SpMat m(n4, n4);
    m.setFromTriplets(trips.begin(), trips.end());
    m.makeCompressed();
    auto lu = std::make_shared<Eigen::SparseLU<SpMat, Eigen::NaturalOrdering<int>>>();
    lu->compute(m);
    if (lu->info() != Eigen::Success) throw NumericError("ShiftedLcalSolver: shifted operator is singular");
    lu_ = lu;
}

RVec ShiftedLcalSolver::solve(const RVec& b) const {
    const auto& lu = *static_cast<const Eigen::SparseLU<SpMat, Eigen::NaturalOrdering<int>>*>(lu_.get());
    const int n4 = static_cast<int>(b.size());
    const int n2 = n4 / 2;
    RVec pb(n4);
    for (int j = 0; j < n4; ++j) pb[banded_index(j, n2)] = b[j];
    const RVec px = lu.solve(pb);
    RVec x(n4);
    for (int j = 0; j < n4; ++j) x[j] = px[banded_index(j, n2)];
    return x;
}

StatePair nonlinearity(const StatePair& s, double beta) {
    const RVec a = s.u.cwiseAbs2();
    const RVec b = s.v.cwiseAbs2();
    return {s.grid, (a + beta * b).cast<cplx>().cwiseProduct(s.u), (b + beta * a).cast<cplx>().cwiseProduct(s.v)};
}

StatePair nonlinear_L(const GroundState& gs, const StatePair& w) {
    const double beta = gs.beta;
    StatePair out = StatePair::zero(w.grid);
    for (int i = 0; i < w.size(); ++i) {
        const double p = gs.phi[i], q = gs.psi[i];
        const cplx h = w.u[i], k = w.v[i];
        out.u[i] = 2.0 * p * p * h + p * p * std::conj(h) + beta * q * q * h + beta * p * q * (k + std::conj(k));
        out.v[i] = 2.0 * q * q * k + q * q * std::conj(k) + beta * p * p * k + beta * p * q * (h + std::conj(h));
    }
    return out;
}

StatePair nonlinear_R(const GroundState& gs, const StatePair& w) {
    const double beta = gs.beta;
    StatePair out = StatePair::zero(w.grid);
    for (int i = 0; i < w.size(); ++i) {
        const double p = gs.phi[i], q = gs.psi[i];
        const cplx h = w.u[i], k = w.v[i];
        const double hh = std::norm(h), kk = std::norm(k);
        out.u[i] = 2.0 * p * hh + p * h * h + beta * p * kk + beta * q * h * (k + std::conj(k)) + hh * h +
                   beta * kk * h;
        out.v[i] = 2.0 * q * kk + q * k * k + beta * q * hh + beta * p * k * (h + std::conj(h)) + kk * k +
                   beta * hh * k;
    }
    return out;
}

double bilinear_B(const SectorOperator& op, const StatePair& a, const StatePair& b) {
    return 0.5 * op.measure *
           ((op.LR * pack_real(a)).dot(pack_real(b)) + (op.LI * pack_imag(a)).dot(pack_imag(b)));
}

double quadratic_Phi(const SectorOperator& op, const StatePair& a) { return bilinear_B(op, a, a); }

SpectralData compute_spectrum(const SectorOperator& op0, int coarse_n) {
    if (op0.ell != 0) throw ConfigError("compute_spectrum: requires the l = 0 sector");
    const GroundState& gs = *op0.gs;
    const RadialGrid& g = *gs.grid;
    SpectralData sd;

    // Coarse dense seed from the symmetric product.
    {
        const int nc = std::min(coarse_n, g.size());
        SectorOperator opc;
        if (nc == g.size()) {
            opc = op0;
        } else {
            const GridPtr gc = make_grid(nc, g.r_max());
            opc = assemble_sector(build_ground_state(gs.beta, gs.branch, gc), 0);
        }
        const Eigen::MatrixXd li = Eigen::MatrixXd(opc.LI);
        const Eigen::MatrixXd lr = Eigen::MatrixXd(opc.LR);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_i(li);
        const RVec d = es_i.eigenvalues().cwiseMax(0.0).cwiseSqrt();
        const Eigen::MatrixXd s = es_i.eigenvectors() * d.asDiagonal() * es_i.eigenvectors().transpose();
        const Eigen::MatrixXd prod = s * lr * s;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_p(0.5 * (prod + prod.transpose()),
                                                            Eigen::EigenvaluesOnly);
        const double lam_min = es_p.eigenvalues()[0];
        if (!(lam_min < 0.0)) {
            throw NumericError("compute_spectrum: symmetric product has no negative eigenvalue "
                               "(no unstable direction found)");
        }
        sd.e0_seed = std::sqrt(-lam_min);
    }

    // Shift-invert refinement on the working grid.
    const SpMat lmat = script_L_matrix(op0);
    const int n4 = static_cast<int>(lmat.rows());
    const int n2 = n4 / 2;
    std::mt19937_64 rng(20240917);
    std::normal_distribution<double> normal;
    RVec x(n4);
    for (int i = 0; i < n4; ++i) x[i] = normal(rng);
    x.normalize();

    double e = sd.e0_seed;
    double residual = 1.0;
    for (int pass = 0; pass < 3 && residual > 1e-13; ++pass) {
        const ShiftedLcalSolver solver(op0, e);
        for (int it = 0; it < 12; ++it) {
            x = solver.solve(x);
            x.normalize();
            const RVec lx = lmat * x;
            e = x.dot(lx);
            residual = (lx - e * x).norm() / std::abs(e);
            if (residual < 1e-13) break;
        }
    }
    if (!(e > 0.0)) throw NumericError("compute_spectrum: refined eigenvalue is not positive");
    sd.e0 = e;

    RVec y1 = x.head(n2);
    RVec y2 = x.tail(n2);
    // Sign: (-Delta Q, Y1) > 0, so that A > 0 raises the kinetic energy.
    const RVec qw = pack_profiles(g, gs.phi, gs.psi);
    const RVec tq = op0.H * qw - qw;
    if (tq.dot(y1) < 0.0) {
        y1 = -y1;
        y2 = -y2;
    }
    const double norm2 = op0.measure * (op0.LI * y2).dot(y2);
    if (!(norm2 > 0.0)) throw NumericError("compute_spectrum: (L_I Y2, Y2) is not positive");
    y1 /= std::sqrt(norm2);
    y2 /= std::sqrt(norm2);
    sd.Y1w = y1;
    sd.Y2w = y2;
    sd.Yplus = unpack(gs.grid, y1, y2);
    sd.Yminus = unpack(gs.grid, -y1, y2);

    RVec yy(n4);
    yy << y1, y2;
    sd.eigen_residual = (lmat * yy - e * yy).norm() / (e * yy.norm());

    const RVec zero = RVec::Zero(g.size());
    for (const auto& [a, b] : {std::pair<const RVec*, const RVec*>{&gs.phi, &zero},
                               std::pair<const RVec*, const RVec*>{&zero, &gs.psi}}) {
        if (a->cwiseAbs().maxCoeff() == 0.0 && b->cwiseAbs().maxCoeff() == 0.0) continue;
        StatePair q = StatePair::zero(gs.grid);
        q.u = cplx(0.0, 1.0) * a->cast<cplx>();
        q.v = cplx(0.0, 1.0) * b->cast<cplx>();
        q *= cplx(1.0 / std::sqrt(inner_w(op0, q, q)), 0.0);
        sd.kernel.push_back(q);
    }

    sd.normalization = bilinear_B(op0, sd.Yplus, sd.Yminus);
    sd.phi_plus = quadratic_Phi(op0, sd.Yplus);
    sd.phi_minus = quadratic_Phi(op0, sd.Yminus);
    const double scale = h1_norm_sq(sd.Yplus);
    if (std::abs(sd.phi_plus) > 1e-6 * scale || std::abs(sd.phi_minus) > 1e-6 * scale) {
        throw NumericError("compute_spectrum: Phi(Y+-) does not vanish");
    }
    return sd;
}

KernelReport kernel_basis(const SectorOperator& op) {
    const RadialGrid& g = *op.gs->grid;
    KernelReport rep;
    rep.threshold = 50.0 * g.h() * g.h();
    const double tau = rep.threshold;
    auto analyse = [&](const SpMat& a, int& dim, int& neg, std::vector<double>& vals,
                       std::vector<StatePair>& basis) {
        neg = count_eigenvalues_below(a, -tau);
        dim = count_eigenvalues_below(a, tau) - neg;
        if (dim > 0) {
            const EigenPairs ep = eigenpairs_near(a, -tau, dim);
            for (int j = 0; j < dim; ++j) {
                vals.push_back(ep.values[j]);
                basis.push_back(unpack(op.gs->grid, ep.vectors[j], RVec::Zero(ep.vectors[j].size())));
            }
        }
    };
    analyse(op.LR, rep.dim_LR, rep.negative_LR, rep.values_LR, rep.basis_LR);
    analyse(op.LI, rep.dim_LI, rep.negative_LI, rep.values_LI, rep.basis_LI);
    return rep;
}

StatePair project_orthogonal(const SectorOperator& op, const SpectralData& sd, const StatePair& s,
                             OrthogonalSpace space) {
    const std::vector<RVec> cs = constraint_vectors(op, sd, space);
    const int m = static_cast<int>(cs.size());
    RVec x = stack(s);
    Eigen::MatrixXd c(x.size(), m);
    for (int j = 0; j < m; ++j) c.col(j) = cs[j];
    const Eigen::MatrixXd gram = c.transpose() * c;
    const RVec coeff = gram.ldlt().solve(c.transpose() * x);
    x -= c * coeff;
    // One refinement sweep removes the residual left by the first solve.
    x -= c * gram.ldlt().solve(c.transpose() * x);
    return unstack(s.grid, x);
}

double orthogonality_residual(const SectorOperator& op, const SpectralData& sd, const StatePair& s,
                              OrthogonalSpace space) {
    const RVec x = stack(s);
    const double xn = x.norm();
    if (xn == 0.0) return 0.0;
    double worst = 0.0;
    for (const RVec& c : constraint_vectors(op, sd, space)) {
        worst = std::max(worst, std::abs(c.dot(x)) / (c.norm() * xn));
    }
    return worst;
}

CoercivityReport coercivity_report(const SectorOperator& op, const SpectralData& sd, bool include_unstable) {
    const GroundState& gs = *op.gs;
    const RadialGrid& g = *gs.grid;
    const double beta = gs.beta;
    // Pointwise bounds of the potential matrices for the bisection bracket.
    double vmax = 0.0, vmin = 0.0;
    for (int i = 0; i < g.size(); ++i) {
        const double p2 = gs.phi[i] * gs.phi[i], q2 = gs.psi[i] * gs.psi[i], pq = gs.phi[i] * gs.psi[i];
        const double a = 3 * p2 + beta * q2, d = 3 * q2 + beta * p2, b = 2 * beta * pq;
        const double mid = 0.5 * (a + d), rad = std::sqrt(0.25 * (a - d) * (a - d) + b * b);
        vmax = std::max(vmax, mid + rad);
        vmin = std::min(vmin, mid - rad);
    }
    const double lo = 0.5 * (1.0 - vmax) - 0.5;
    const double hi = 0.5 * (1.0 - vmin) + 0.5;
    const double tol = 1e-10;

    const int n2 = 2 * g.size();
    const RVec zero = RVec::Zero(g.size());
    std::vector<RVec> real_c, imag_c;
    if (include_unstable) {
        real_c.push_back(sd.Y2w);
        imag_c.push_back(sd.Y1w);
    }
    if (gs.phi.cwiseAbs().maxCoeff() > 0.0) imag_c.push_back(pack_profiles(g, gs.phi, zero));
    if (gs.psi.cwiseAbs().maxCoeff() > 0.0) imag_c.push_back(pack_profiles(g, zero, gs.psi));
    (void)n2;

    const SpMat half_lr = 0.5 * op.LR;
    const SpMat half_li = 0.5 * op.LI;
    CoercivityReport rep;
    rep.real_part = smallest_eigenvalue(half_lr, lo, hi, tol, &op.H, real_c);
    rep.imag_part = smallest_eigenvalue(half_li, lo, hi, tol, &op.H, imag_c);
    rep.c = std::min(rep.real_part, rep.imag_part);
    return rep;
}

double coercivity_estimate(const SectorOperator& op, const SpectralData& sd) {
    const CoercivityReport rep = coercivity_report(op, sd, true);
    if (!(rep.c > 0.0)) {
        std::ostringstream msg;
        msg << "coercivity_estimate: non-positive constant " << rep.c
            << " (resolution failure or wrong constraint set)";
        throw NumericError(msg.str());
    }
    return rep.c;
}

SpectralProjection spectral_project(const SectorOperator& op, const SpectralData& sd, const StatePair& w) {
    SpectralProjection out;
    out.alpha_plus = bilinear_B(op, w, sd.Yminus);
    out.alpha_minus = bilinear_B(op, w, sd.Yplus);
    StatePair rest = w - out.alpha_plus * sd.Yplus - out.alpha_minus * sd.Yminus;
    for (const StatePair& q : sd.kernel) out.beta.push_back(inner_w(op, rest, q));
    for (size_t j = 0; j < sd.kernel.size(); ++j) rest -= out.beta[j] * sd.kernel[j];
    out.remainder = rest;
    out.phi_w = quadratic_Phi(op, w);
    out.phi_remainder = quadratic_Phi(op, rest);
    return out;
}

}  // namespace nlslab
