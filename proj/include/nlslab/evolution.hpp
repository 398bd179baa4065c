// Time integration of the radial system
//     i u_t + Delta u + (|u|^2 + beta |v|^2) u = 0
//     i v_t + Delta v + (|v|^2 + beta |u|^2) v = 0
// by splitting into the exact linear flow (diagonal in the sine transform of
// w = r u) and the exact pointwise phase rotation of the nonlinear part.
#pragma once

#include "nlslab/functionals.hpp"
#include "nlslab/sine_transform.hpp"

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace nlslab {

enum class Integrator { strang, kl6 };
std::string to_string(Integrator i);
Integrator parse_integrator(const std::string& name);  // throws ConfigError

enum class Verdict { scatter, blowup, converge_to_Q, undetermined };
std::string to_string(Verdict v);
int verdict_flag(Verdict v);  // 0 undetermined, 1 converge_to_Q, 2 scatter, 3 blowup

struct EvolutionConfig {
    double dt = 1e-3;                 // magnitude; the direction follows t_span
    double t_start = 0.0;
    double t_end = 1.0;
    int sample_every = 10;
    double blowup_K_factor = 5.0;
    double tail_fraction_tol = 1e-6;  // spectral-tail fraction for resolution saturation
    double scatter_P_factor = 0.01;
    double scatter_window = 1.0;      // time P must stay below the threshold
    double converge_delta_factor = 0.1;  // final delta / K(Q) below which converge_to_Q is assigned
    double energy_drift_tol = 1e-8;   // relative drift per unit time before the run is flagged
    double beta = 3.0;
    Integrator integrator = Integrator::kl6;
    bool detectors = true;

    void validate() const;  // throws ConfigError
};

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct TrajectorySample {
    double t = 0.0;
    double mass = 0.0, energy = 0.0, kinetic = 0.0, potential = 0.0;
    double delta = 0.0, h1norm = 0.0, tail_fraction = 0.0;
    // Filled by a sample hook when modulation / spectral projections are enabled.
    double alpha = kNaN, theta0 = kNaN, theta1 = kNaN;
    double alpha_plus = kNaN, alpha_minus = kNaN, beta_sum = kNaN;
    bool modulation_converged = false;
};

struct TrajectoryRecord {
    std::vector<TrajectorySample> samples;
    Verdict verdict = Verdict::undetermined;
    std::string termination;
    bool energy_drift_flag = false;
    double max_energy_drift_rate = 0.0;  // max |E(t) - E(0)| / |E(0)| / |t - t0|
    double max_mass_drift_rate = 0.0;
    StatePair final_state;
    long steps = 0;
};

// Optional per-sample callback: (state, sample) -> fills extra fields.
using SampleHook = std::function<void(const StatePair&, TrajectorySample&)>;

// Stepper owning the transform and the linear-flow symbol for one grid.
// Between load() and store() the state is kept as w = r u on the interior
// nodes, so long runs do not repeat the (rounded) multiplications by r, 1/r.
class SplitStepper {
public:
    SplitStepper(const GridPtr& grid, double beta);

    // e^{i t Delta} on both components (any real t).
    void linear_flow(StatePair& s, double t);
    // u <- u exp(i t (|u|^2 + beta |v|^2)), v likewise.
    void nonlinear_flow(StatePair& s, double t);
    // Half linear, full nonlinear, half linear.
    void strang_step(StatePair& s, double dt);
    // Symmetric 9-stage composition of Strang steps (6th order).
    void kl6_step(StatePair& s, double dt);
    void step(StatePair& s, double dt, Integrator integrator);

    // Internal-state interface used by evolve().
    void load(const StatePair& s);
    void store(StatePair& s) const;  // the wall sample is set to zero
    void step_w(double dt, Integrator integrator);
    bool finite() const;

    // Fraction of sum |w_k|^2 carried by the upper third of sine modes.
    double tail_fraction(const StatePair& s);

private:
    void linear_flow_w(double t);
    void nonlinear_flow_w(double t);
    // e^{-i lambda_k t} / normalization, cached for the few substep lengths a scheme uses.
    const CVec& phases(double t);

    GridPtr grid_;
    double beta_;
    SineTransform dst_;
    RVec symbol_;  // eigenvalues of -Delta in the sine basis
    RVec r_, inv_r_, inv_r2_;
    CVec wu_, wv_;
    std::vector<std::pair<double, CVec>> phase_cache_;
};

StatePair strang_step(const StatePair& s, double dt, double beta);

// Exact linear flow e^{i t Delta}.
StatePair free_propagate(const StatePair& s, double t);

TrajectorySample measure_sample(const StatePair& s, double t, double beta, const ReferenceValues& ref);

std::optional<Verdict> detect_blowup(const std::vector<TrajectorySample>& samples, const EvolutionConfig& cfg,
                                     const ReferenceValues& ref);
std::optional<Verdict> detect_scattering(const std::vector<TrajectorySample>& samples,
                                         const EvolutionConfig& cfg, const ReferenceValues& ref);

// Integrates from cfg.t_start to cfg.t_end (either direction), sampling every
// cfg.sample_every steps and at the end. Stops early when a detector fires
// or the state becomes non-finite.
TrajectoryRecord evolve(const StatePair& s0, const EvolutionConfig& cfg, const ReferenceValues& ref,
                        const SampleHook& hook = {});

}  // namespace nlslab
