// Localized virial quantities for radial states.
//
//   V_R   = int a (|u|^2 + |v|^2)
//   V_R'  = 2 Im int a' (u_r conj(u) + v_r conj(v))
//   V_R'' = 4 int a'' (|u_r|^2 + |v_r|^2) - int Delta^2 a (|u|^2 + |v|^2)
//           - int Delta a (|u|^4 + 2 beta |uv|^2 + |v|^4)
//         = 8K - 6P + A_R,
//   A_R   = 4 int (a'' - 2)(|u_r|^2 + |v_r|^2) - int Delta^2 a (|u|^2 + |v|^2)
//           - int (Delta a - 6)(|u|^4 + 2 beta |uv|^2 + |v|^4),
// with Delta a = a'' + 2a'/r and Delta^2 a = a'''' + 4a'''/r. At the
// threshold E = E(Q), 8K - 6P = 4(K(Q) - K).
#pragma once

#include "nlslab/ground_state.hpp"

#include <string>
#include <utility>

namespace nlslab {

enum class WeightMode { plateau_quadratic, capped, exact_quadratic };
std::string to_string(WeightMode m);
WeightMode parse_weight_mode(const std::string& name);  // throws ConfigError

// a and its first four radial derivatives at one radius.
struct WeightJet {
    double a = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0, a4 = 0.0;
};

// Radial weights equal to r^2 on [0, R]:
//   plateau_quadratic: a'' = 2 - f((r - R)/(2R)) on [R, 3R] with f >= 0, so
//     a'' <= 2; f switches from 0 to 2 and two bump terms make a, a' vanish at
//     3R; a = 0 beyond. C^5 overall.
//   capped: C^4 degree-9 Hermite transition to the constant 2R^2 at 3R.
//   exact_quadratic: a = r^2 everywhere.
class VirialWeight {
public:
    VirialWeight(WeightMode mode, double R);

    WeightMode mode() const noexcept { return mode_; }
    double R() const noexcept { return R_; }
    WeightJet jet(double r) const;

    // Samplewise maxima on the grid nodes.
    double max_a2(const RadialGrid& g) const;
    // max |a'|^2 / a over nodes with a > 0 (the constant C in |grad a|^2 <= C a).
    double gradient_constant(const RadialGrid& g) const;

private:
    WeightMode mode_;
    double R_;
    double c1_ = 0.0, c2_ = 0.0;      // plateau bump amplitudes
    double hermite_[10] = {};         // capped transition coefficients in s
};

struct SampledWeight {
    RVec a, a1, a2, lap, bilap;  // a, a', a'', Delta a, Delta^2 a on the nodes
};

// Throws ConfigError when the transition region [R, 3R] leaves the grid.
SampledWeight sample_weight(const VirialWeight& w, const RadialGrid& g);

double virial_V(const StatePair& s, const VirialWeight& w);
double virial_Vprime(const StatePair& s, const VirialWeight& w);
double virial_AR(const StatePair& s, const VirialWeight& w, double beta);
// Full V_R'' from the general identity (no threshold assumption).
double virial_Vsecond(const StatePair& s, const VirialWeight& w, double beta);

enum class VirialRegime { high, low };

// Right-hand side of the threshold identity: high (K >= K(Q)): -4 delta + A_R;
// low (K <= K(Q)): 4 delta + A_R. Throws ConfigError when the regime does not
// match the sign of K - K(Q).
double second_virial(const StatePair& s, const VirialWeight& w, const GroundState& gs, VirialRegime regime);

struct BanicaGap {
    double lhs = 0.0;          // (Im int a' (u_r conj u + v_r conj v))^2
    double rhs = 0.0;          // delta^2 int a'^2 (|u|^2 + |v|^2)
    double ratio = 0.0;        // lhs / rhs (0 when both vanish)
    double gn_deficit = 0.0;   // K - (P / (c_GN M^{1/2}))^{2/3} >= 0
    double delta = 0.0;
};

// Throws ConfigError unless M(s) and E(s) match M(Q), E(Q) to `tol` relative.
BanicaGap banica_gap(const StatePair& s, const VirialWeight& w, const GroundState& gs, double tol = 1e-6);

// Member of the family lambda^{3/2} e^{i eps a(lambda r)} Q(lambda r) with
// M = M(Q) and E = E(Q) (mass renormalized exactly, lambda by bisection).
// upper selects the root with K > K(Q); otherwise the one with K < K(Q).
StatePair threshold_phase_family(const GroundState& gs, const VirialWeight& w, double eps, bool upper);

}  // namespace nlslab
