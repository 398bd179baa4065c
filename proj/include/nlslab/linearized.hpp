// Linearization around the standing wave e^{it}Q.
//
// Writing a perturbation as w = w1 + i w2 (real pairs w1, w2), substitution
// of e^{it}(Q + w) into the system gives
//     d/dt w + Lcal w = i R(w),      Lcal w = -L_I w2 + i L_R w1,
// with the self-adjoint operators
//     L_R = 1 - Delta - [[3 phi^2 + beta psi^2, 2 beta phi psi],
//                        [2 beta phi psi, 3 psi^2 + beta phi^2]]
//     L_I = 1 - Delta - diag(phi^2 + beta psi^2, psi^2 + beta phi^2).
//
// Matrices act on the w = r*u representation with interleaved component
// ordering (index 2*i + c), which keeps them banded (half-bandwidth 7).
// Inner products in this representation use the uniform weight 4*pi*h.
#pragma once

#include "nlslab/ground_state.hpp"
#include "nlslab/spectral_utils.hpp"

#include <limits>
#include <memory>
#include <vector>

namespace nlslab {

struct SectorOperator {
    GroundStatePtr gs;
    int ell = 0;
    SpMat LR;  // 2N x 2N
    SpMat LI;  // 2N x 2N
    SpMat H;   // 1 - Delta_ell on both components (H^1 Gram matrix)
    double measure = 0.0;  // 4 pi h
};

// Throws ConfigError unless ell is 0 or 1.
SectorOperator assemble_sector(const GroundStatePtr& gs, int ell);

// Conversions between pairs and interleaved w-representation vectors.
RVec pack_real(const StatePair& s);  // Re parts
RVec pack_imag(const StatePair& s);  // Im parts
StatePair unpack(const GridPtr& grid, const RVec& re, const RVec& im);

StatePair apply_LR(const SectorOperator& op, const StatePair& s);
StatePair apply_LI(const SectorOperator& op, const StatePair& s);
// Lcal s = -L_I(Im s) + i L_R(Re s).
StatePair apply_script_L(const SectorOperator& op, const StatePair& s);

// Real 4N x 4N matrix of Lcal acting on [Re (2N); Im (2N)].
SpMat script_L_matrix(const SectorOperator& op);

// Sparse LU solver for (Lcal - sigma) x = b. The factorization uses a fully
// interleaved ordering (index 4i + 2*block + c) so that it stays banded.
class ShiftedLcalSolver {
public:
    ShiftedLcalSolver(const SectorOperator& op, double sigma);
    // b and the result are stacked [Re (2N); Im (2N)] w-representation vectors.
    RVec solve(const RVec& b) const;
    double sigma() const noexcept { return sigma_; }

private:
    double sigma_;
    std::shared_ptr<void> lu_;
};

// Linear and remainder terms of the nonlinearity around Q:
//   N(Q + w) - N(Q) = L(w) + R(w),  N(u,v) = ((|u|^2+beta|v|^2)u, (|v|^2+beta|u|^2)v).
StatePair nonlinear_L(const GroundState& gs, const StatePair& w);
StatePair nonlinear_R(const GroundState& gs, const StatePair& w);
StatePair nonlinearity(const StatePair& s, double beta);

// B(a, b) = 1/2 (L_R a1, b1) + 1/2 (L_I a2, b2);  Phi(a) = B(a, a).
double bilinear_B(const SectorOperator& op, const StatePair& a, const StatePair& b);
double quadratic_Phi(const SectorOperator& op, const StatePair& a);

struct SpectralData {
    double e0 = 0.0;
    double e0_seed = 0.0;        // coarse dense estimate
    double eigen_residual = 0.0; // ||Lcal Y+ - e0 Y+|| / (e0 ||Y+||), L^2
    StatePair Yplus;             // Lcal Y+ = e0 Y+
    StatePair Yminus;            // -conj(Y+), Lcal Y- = -e0 Y-
    RVec Y1w, Y2w;               // Re and Im of Y+ in the w representation
    std::vector<StatePair> kernel;  // Q_j: L^2-normalized phase directions (i phi, 0), (0, i psi)
    double normalization = 0.0;  // B(Y+, Y-) after normalization
    double phi_plus = 0.0;       // Phi(Y+)
    double phi_minus = 0.0;      // Phi(Y-)
    double coercivity_c = std::numeric_limits<double>::quiet_NaN();
};

// e0 from the symmetric product L_I^{1/2} L_R L_I^{1/2} (dense, on a coarse
// grid of at most coarse_n nodes), refined by shift-invert iteration on the
// working grid. Throws NumericError when no negative direction exists.
SpectralData compute_spectrum(const SectorOperator& op0, int coarse_n = 512);

struct KernelReport {
    double threshold = 0.0;      // 50 h^2
    int dim_LR = 0;
    int dim_LI = 0;
    int negative_LR = 0;         // eigenvalues below -threshold
    int negative_LI = 0;
    std::vector<double> values_LR, values_LI;
    std::vector<StatePair> basis_LR, basis_LI;  // real pairs
};

// Kernel dimensions by inertia counts on (-threshold, threshold) and the
// corresponding eigenvectors by shift-invert iteration.
KernelReport kernel_basis(const SectorOperator& op);

enum class OrthogonalSpace { Gperp, Gtilde };

// L^2-orthogonal projection onto the constraint set:
//   Gperp : int Im(u) phi = int Im(v) psi = 0 and int Re(u) Delta phi + Re(v) Delta psi = 0
//   Gtilde: int Im(u) phi = int Im(v) psi = 0 and B(s, Y+) = B(s, Y-) = 0
StatePair project_orthogonal(const SectorOperator& op, const SpectralData& sd, const StatePair& s,
                             OrthogonalSpace space);

// Largest normalized constraint violation |c.s| / (||c|| ||s||) for the space.
double orthogonality_residual(const SectorOperator& op, const SpectralData& sd, const StatePair& s,
                              OrthogonalSpace space);

struct CoercivityReport {
    double real_part = 0.0;  // min of 1/2 (L_R s1, s1) / ||s1||_{H^1}^2
    double imag_part = 0.0;  // min of 1/2 (L_I s2, s2) / ||s2||_{H^1}^2
    double c = 0.0;          // min of both
};

// Smallest Rayleigh quotient Phi(s) / ||s||^2_{H^1} over the discretized
// Gtilde-perp. With include_unstable = false the Y+- constraints are dropped.
CoercivityReport coercivity_report(const SectorOperator& op, const SpectralData& sd,
                                   bool include_unstable = true);
// Returns c; throws NumericError if it is not positive.
double coercivity_estimate(const SectorOperator& op, const SpectralData& sd);

struct SpectralProjection {
    double alpha_plus = 0.0;   // B(w, Y-)
    double alpha_minus = 0.0;  // B(w, Y+)
    std::vector<double> beta;  // (w - alpha_+ Y+ - alpha_- Y-, Q_j)
    StatePair remainder;
    double phi_w = 0.0;
    double phi_remainder = 0.0;
};

// w = alpha_+ Y+ + alpha_- Y- + sum beta_j Q_j + remainder with remainder in
// Gtilde-perp; Phi(w) = Phi(remainder) + 2 alpha_+ alpha_-.
SpectralProjection spectral_project(const SectorOperator& op, const SpectralData& sd,
                                    const StatePair& w);

}  // namespace nlslab
