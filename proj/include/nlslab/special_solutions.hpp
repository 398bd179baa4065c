// Exponential-series approximate solutions near the standing wave.
//
// With w(t) = sum_{j=1}^{l} e^{-j e0 t} Z_j and the linearized equation
//     d/dt w + Lcal w = i R(w),
// matching the coefficient of e^{-n e0 t} gives
//     (Lcal - n e0) Z_n = i R_n,   Z_1 = A Y+,
// where R_n collects the quadratic terms of R built from Z_a, Z_b with
// a + b = n and the cubic terms from Z_a, Z_b, Z_c with a + b + c = n. The
// exponentials are real, so conjugation never mixes frequencies.
#pragma once

#include "nlslab/linearized.hpp"

#include <memory>
#include <vector>

namespace nlslab {

using SectorPtr = std::shared_ptr<const SectorOperator>;
using SpectralPtr = std::shared_ptr<const SpectralData>;

struct FrequencySeries {
    SectorPtr op;
    SpectralPtr spectral;
    double A = 0.0;
    double e0 = 0.0;
    std::vector<StatePair> Z;            // Z[j-1] pairs with e^{-j e0 t}
    std::vector<double> solve_residual;  // ||(Lcal - j e0) Z_j - i R_j|| / ||R_j||, 0 when R_j = 0

    int order() const { return static_cast<int>(Z.size()); }
    const GroundState& ground_state() const { return *op->gs; }
};

// Frequency-n coefficient of R(sum_j e^{-j e0 t} Z_j) for n >= 2, using the
// coefficients Z_1..Z_{n-1} of the series.
StatePair remainder_coefficient(const GroundState& gs, const std::vector<StatePair>& Z, int n);

// Throws ConfigError for l_max < 1 and NumericError when a shifted solve is
// near-singular (resonance) or misses its residual bound.
FrequencySeries build_Z_sequence(const SectorPtr& op, const SpectralPtr& spectral, double A, int l_max);

// V_l(t) = sum_{j<=l} e^{-j e0 t} Z_j; l <= 0 means the full order.
StatePair eval_V(const FrequencySeries& series, double t, int l = 0);
// d/dt V_l(t), analytic.
StatePair eval_dVdt(const FrequencySeries& series, double t, int l = 0);

// eps_l(t) = d/dt V_l + Lcal V_l - i R(V_l), evaluated pointwise.
StatePair residual_epsilon(const FrequencySeries& series, double t, int l = 0);

// R(V_l(t)) assembled from its frequency coefficients n = 2..3l.
StatePair remainder_by_frequency(const FrequencySeries& series, double t, int l = 0);

// Smallest t with ||V_l(t)||_{H^1} <= fraction * ||Q||_{H^1} (and for all later t
// on the scan).
double auto_t0(const FrequencySeries& series, double fraction = 0.05);

// e^{i t0}(Q + V_l(t0)); throws ConfigError unless ||V_l(t0)||_{H^1} <= 0.1 ||Q||_{H^1}.
StatePair initial_data_UA(const FrequencySeries& series, double t0);

// T_A = -ln|A| / e0, the shift aligning U^A with U^{sign A}. Throws for A = 0.
double time_shift_TA(double A, double e0);

}  // namespace nlslab
