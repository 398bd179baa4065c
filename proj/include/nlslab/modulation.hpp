// Modulation of near-ground-state data:
//   s = (e^{i theta} ((1 + alpha) phi + h), e^{i theta~} ((1 + alpha) psi + k))
// with (h, k) in G-perp:
//   Im int h phi = Im int k psi = 0,  Re int (h Delta phi + k Delta psi) = 0.
// On the symmetric branch each component carries its own phase; on the
// semi-trivial branches one phase acts on both components and theta~ = 0.
#pragma once

#include "nlslab/evolution.hpp"
#include "nlslab/ground_state.hpp"

#include <optional>

namespace nlslab {

struct Modulation {
    double alpha = 0.0;
    double theta0 = 0.0;    // phase of the first component (or the common phase)
    double theta1 = 0.0;    // phase of the second component; 0 on semi-trivial branches
    StatePair remainder;    // (h, k)
    double delta = 0.0;
    double orthogonality_residual = 0.0;  // largest G-perp violation relative to ||s|| ||c||
    int newton_iterations = 0;
    bool converged = false;
};

// Newton iteration on the phase condition(s) from `theta_guess` (closed-form
// phase when absent), stopping at |F| <= 1e-14 |z| or after 50 iterations
// (then converged = false). Throws ConfigError when delta(s) >= delta0_factor K(Q).
Modulation modulation_solve(const StatePair& s, const GroundState& gs, double delta0_factor = 0.1,
                            std::optional<std::pair<double, double>> theta_guess = std::nullopt);

// Inverse of the decomposition.
StatePair modulation_reconstruct(const Modulation& m, const GroundState& gs);

// Sample hook filling alpha, theta0, theta1 when delta < delta0_factor K(Q).
SampleHook modulation_hook(const GroundStatePtr& gs, double delta0_factor = 0.1);

}  // namespace nlslab
