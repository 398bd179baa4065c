// Conserved and derived functionals of radial states, plus the radial
// differential operators used throughout.
//
//   M = int |u|^2 + |v|^2             K = int |grad u|^2 + |grad v|^2
//   P = int |u|^4 + 2 beta |uv|^2 + |v|^4
//   E = K/2 - P/4                     J = M^{1/2} K^{3/2} / P
#pragma once

#include "nlslab/state.hpp"

#include <array>

namespace nlslab {

double mass(const StatePair& s);
double mass(const ComplexField& f);

// Kinetic energy through the stencil: 4 pi h sum conj(w) T w.
double kinetic(const StatePair& s);
double kinetic(const ComplexField& f);
// Same quantity through the sine-transform representation (Parseval).
double kinetic_spectral(const StatePair& s);

double potential_P(const StatePair& s, double beta);
// Pointwise potential density |u|^4 + 2 beta |u|^2|v|^2 + |v|^4.
RVec potential_density(const StatePair& s, double beta);
double energy(const StatePair& s, double beta);
// Radial data carry no momentum; returned as an exact zero vector.
std::array<double, 3> momentum(const StatePair& s);

// Throws NumericError when P(s) = 0.
double weinstein_J(const StatePair& s, double beta);

// H^1 proxy: ||s||^2 = K(s) + M(s).
double h1_norm_sq(const StatePair& s);
double h1_norm(const StatePair& s);

// Real L^2 inner product of complex pairs: int Re(a_u conj b_u + a_v conj b_v).
double inner_real(const StatePair& a, const StatePair& b);

// Ground-state reference values used by the threshold ratios.
struct ReferenceValues {
    double beta = 0.0;
    double M = 0.0;
    double K = 0.0;
    double E = 0.0;
    double P = 0.0;
};

double me_ratio(const StatePair& s, const ReferenceValues& ref);
double mk_ratio(const StatePair& s, const ReferenceValues& ref);
// delta(s) = |K(s) - K(Q)|.
double delta(const StatePair& s, const ReferenceValues& ref);

// (delta u(delta r), delta v(delta r)) by cubic interpolation onto the same
// grid; values sampled beyond r_max are zero. Warns when the discarded source
// tail carries more than 1e-10 of the mass.
StatePair rescale(const StatePair& s, double factor);

// Cubic Lagrange interpolation of radial samples at radius r, using the even
// extension through the origin and the Dirichlet wall at r_max.
cplx sample_radial(const CVec& u, double h, double r);

// Radial Laplacian via the w = r f substitution.
ComplexField laplacian(const ComplexField& f);
// Lambda f = f + r f' = d(r f)/dr.
ComplexField scaling_generator(const ComplexField& f);
// f' = (d(r f)/dr - f) / r.
ComplexField radial_derivative(const ComplexField& f);

}  // namespace nlslab
