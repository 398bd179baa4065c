// Radial ground states of the scalar equation  -phi + Delta phi + phi^3 = 0
// and of the coupled system per coupling regime:
//   0 < beta < 1 : semi-trivial pairs (phi, 0) and (0, phi)
//   beta > 1     : the symmetric pair (1+beta)^{-1/2} (phi, phi)
#pragma once

#include "nlslab/functionals.hpp"

#include <memory>
#include <string>
#include <utility>

namespace nlslab {

enum class Branch { semi_trivial_first, semi_trivial_second, symmetric };

std::string to_string(Branch b);
// Throws ConfigError for unknown names.
Branch parse_branch(const std::string& name);
// Throws ConfigError for beta = 1, beta <= 0 or a branch outside its regime.
void validate_branch(double beta, Branch branch);

struct ScalarProfile {
    ComplexField field;     // real-valued phi on the grid
    double phi0 = 0.0;      // shooting value phi(0)
    double ode_residual = 0.0;  // max |phi'' + 2 phi'/r - phi + phi^3|
    double match_radius = 0.0;  // where the e^{-r}/r tail was attached
    int newton_iterations = 0;
};

// Bisection shooting on phi(0) in [1, 10] with RK4 over [0, 0.6 r_max],
// tail completion C e^{-r}/r, then Newton refinement on the discrete
// equation. Postcondition: residual <= tol * max|phi|, phi positive and
// non-increasing. Requires tol in (0, 1e-6].
ScalarProfile shoot_scalar_profile(const GridPtr& grid, double tol = 1e-8);

struct GroundState {
    double beta = 0.0;
    Branch branch = Branch::symmetric;
    GridPtr grid;
    ScalarProfile scalar;   // phi of the scalar equation
    RVec phi;               // first component profile
    RVec psi;               // second component profile
    StatePair Q;            // (phi, psi) as a complex pair
    double M = 0.0, K = 0.0, E = 0.0, P = 0.0, c_gn = 0.0;

    ReferenceValues reference() const { return {beta, M, K, E, P}; }
};

using GroundStatePtr = std::shared_ptr<const GroundState>;

GroundStatePtr build_ground_state(double beta, Branch branch, const GridPtr& grid,
                                  double tol = 1e-8);

// (|K - 3M| / K, |P - 4M| / P).
std::pair<double, double> pohozaev_residuals(const GroundState& gs);

struct GnConstants {
    double from_mk = 0.0;  // 4 / (3 M^{1/2} K^{1/2})
    double from_me = 0.0;  // 4 / (3 sqrt(6) M^{1/2} E^{1/2})
    double relative_gap = 0.0;
};
GnConstants gn_constant_forms(const GroundState& gs);
// Returns c_GN; throws NumericError when the two forms disagree by > 1e-8.
double sharp_gn_constant(const GroundState& gs);

}  // namespace nlslab
