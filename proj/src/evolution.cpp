#include "nlslab/evolution.hpp"

#include "nlslab/errors.hpp"
#include "nlslab/stencil.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

namespace nlslab {

namespace {

// Kahan-Li s9odr6a: symmetric 9-stage composition coefficients for a
// second-order symmetric base method (order 6).
constexpr std::array<double, 9> kKL6 = {
    0.39216144400731413928,  0.33259913678935943860, -0.70624617255763935981,
    0.082213596293550800230, 0.79854399093482996340, 0.082213596293550800230,
    -0.70624617255763935981, 0.33259913678935943860, 0.39216144400731413928};

// e^{i theta} with its components nudged by a few ulps so that |e|^2 is as
// close to 1 as the format allows. Cached phase factors are reused for every
// step, so a fixed modulus error would otherwise accumulate into a steady
// mass drift.
cplx unit_phase(double theta) {
    const double c0 = std::cos(theta);
    const double s0 = std::sin(theta);
    double best_c = c0, best_s = s0;
    long double best = std::abs(static_cast<long double>(c0) * c0 + static_cast<long double>(s0) * s0 - 1.0L);
    auto nudge = [](double x, int k) {
        for (; k > 0; --k) x = std::nextafter(x, 2.0);
        for (; k < 0; ++k) x = std::nextafter(x, -2.0);
        return x;
    };
    for (int i = -2; i <= 2; ++i) {
        for (int j = -2; j <= 2; ++j) {
            const double c = nudge(c0, i), s = nudge(s0, j);
            const long double err = std::abs(static_cast<long double>(c) * c + static_cast<long double>(s) * s - 1.0L);
            if (err < best) {
                best = err;
                best_c = c;
                best_s = s;
            }
        }
    }
    return {best_c, best_s};
}

}  // namespace

std::string to_string(Integrator i) { return i == Integrator::strang ? "strang" : "kl6"; }

Integrator parse_integrator(const std::string& name) {
    if (name == "strang") return Integrator::strang;
    if (name == "kl6") return Integrator::kl6;
    throw ConfigError("unknown integrator '" + name + "' (expected strang or kl6)");
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::scatter: return "scatter";
        case Verdict::blowup: return "blowup";
        case Verdict::converge_to_Q: return "converge_to_Q";
        case Verdict::undetermined: break;
    }
    return "undetermined";
}

int verdict_flag(Verdict v) {
    switch (v) {
        case Verdict::converge_to_Q: return 1;
        case Verdict::scatter: return 2;
        case Verdict::blowup: return 3;
        case Verdict::undetermined: break;
    }
    return 0;
}

void EvolutionConfig::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("evolution: dt must be positive");
    if (!std::isfinite(t_start) || !std::isfinite(t_end)) throw ConfigError("evolution: t_span must be finite");
    if (sample_every < 1) throw ConfigError("evolution: sample_every must be at least 1");
    if (!(blowup_K_factor > 1.0)) throw ConfigError("evolution: blowup_K_factor must exceed 1");
    if (!(tail_fraction_tol > 0.0 && tail_fraction_tol < 0.5))
        throw ConfigError("evolution: tail_fraction_tol must lie in (0, 0.5)");
    if (!(scatter_P_factor > 0.0 && scatter_P_factor < 1.0))
        throw ConfigError("evolution: scatter_P_factor must lie in (0, 1)");
    if (!(scatter_window > 0.0)) throw ConfigError("evolution: scatter_window must be positive");
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw ConfigError("evolution: beta must be non-negative");
}

SplitStepper::SplitStepper(const GridPtr& grid, double beta)
    : grid_(grid),
      beta_(beta),
      dst_(grid->size() - 1),
      symbol_(neg_d2_symbol(grid->size(), grid->h())),
      r_(grid->r().head(grid->size() - 1)),
      inv_r_(r_.cwiseInverse()),
      inv_r2_(inv_r_.cwiseAbs2()),
      wu_(grid->size() - 1),
      wv_(grid->size() - 1) {}

void SplitStepper::load(const StatePair& s) {
    const Eigen::Index m = wu_.size();
    wu_ = s.u.head(m).cwiseProduct(r_.cast<cplx>());
    wv_ = s.v.head(m).cwiseProduct(r_.cast<cplx>());
}

void SplitStepper::store(StatePair& s) const {
    const Eigen::Index m = wu_.size();
    s.u.head(m) = wu_.cwiseProduct(inv_r_.cast<cplx>());
    s.v.head(m) = wv_.cwiseProduct(inv_r_.cast<cplx>());
    s.u[m] = 0.0;  // Dirichlet wall
    s.v[m] = 0.0;
}

const CVec& SplitStepper::phases(double t) {
    for (const auto& [key, value] : phase_cache_) {
        if (key == t) return value;
    }
    if (phase_cache_.size() >= 16) phase_cache_.clear();
    // The round-trip normalization of the unscaled transforms is folded in.
    const double scale = 1.0 / dst_.normalization();
    CVec f(symbol_.size());
    for (Eigen::Index k = 0; k < symbol_.size(); ++k) f[k] = scale * unit_phase(-symbol_[k] * t);
    phase_cache_.emplace_back(t, std::move(f));
    return phase_cache_.back().second;
}

void SplitStepper::linear_flow_w(double t) {
    if (t == 0.0) return;
    const CVec& f = phases(t);
    dst_.apply_unnormalized(wu_);
    dst_.apply_unnormalized(wv_);
    wu_.array() *= f.array();
    wv_.array() *= f.array();
    dst_.apply_unnormalized(wu_);
    dst_.apply_unnormalized(wv_);
}

void SplitStepper::nonlinear_flow_w(double t) {
    for (Eigen::Index i = 0; i < wu_.size(); ++i) {
        const double a = std::norm(wu_[i]) * inv_r2_[i];
        const double b = std::norm(wv_[i]) * inv_r2_[i];
        wu_[i] *= std::polar(1.0, t * (a + beta_ * b));
        wv_[i] *= std::polar(1.0, t * (b + beta_ * a));
    }
}

void SplitStepper::step_w(double dt, Integrator integrator) {
    if (integrator == Integrator::strang) {
        linear_flow_w(0.5 * dt);
        nonlinear_flow_w(dt);
        linear_flow_w(0.5 * dt);
        return;
    }
    // Symmetric composition of Strang steps; adjacent half linear flows are merged.
    double pending = 0.5 * kKL6[0] * dt;
    for (size_t j = 0; j < kKL6.size(); ++j) {
        linear_flow_w(pending);
        nonlinear_flow_w(kKL6[j] * dt);
        pending = 0.5 * kKL6[j] * dt + (j + 1 < kKL6.size() ? 0.5 * kKL6[j + 1] * dt : 0.0);
    }
    linear_flow_w(pending);
}

bool SplitStepper::finite() const { return wu_.allFinite() && wv_.allFinite(); }

void SplitStepper::linear_flow(StatePair& s, double t) {
    load(s);
    linear_flow_w(t);
    store(s);
}

void SplitStepper::nonlinear_flow(StatePair& s, double t) {
    load(s);
    nonlinear_flow_w(t);
    store(s);
}

void SplitStepper::strang_step(StatePair& s, double dt) { step(s, dt, Integrator::strang); }
void SplitStepper::kl6_step(StatePair& s, double dt) { step(s, dt, Integrator::kl6); }

void SplitStepper::step(StatePair& s, double dt, Integrator integrator) {
    load(s);
    step_w(dt, integrator);
    store(s);
}

double SplitStepper::tail_fraction(const StatePair& s) {
    const Eigen::Index m = wu_.size();
    CVec a = s.u.head(m).cwiseProduct(r_.cast<cplx>());
    CVec b = s.v.head(m).cwiseProduct(r_.cast<cplx>());
    dst_.apply_unnormalized(a);  // the fraction is scale-free
    dst_.apply_unnormalized(b);
    const Eigen::Index cut = (2 * m) / 3;
    const double total = a.squaredNorm() + b.squaredNorm();
    const double tail = a.tail(m - cut).squaredNorm() + b.tail(m - cut).squaredNorm();
    return total > 0.0 ? tail / total : 0.0;
}

StatePair strang_step(const StatePair& s, double dt, double beta) {
    check_state(s, "strang_step");
    SplitStepper stepper(s.grid, beta);
    StatePair out = s;
    stepper.strang_step(out, dt);
    if (!out.all_finite()) throw NumericError("strang_step: non-finite values (time step too large for the data)");
    return out;
}

StatePair free_propagate(const StatePair& s, double t) {
    check_state(s, "free_propagate");
    SplitStepper stepper(s.grid, 0.0);
    StatePair out = s;
    stepper.linear_flow(out, t);
    return out;
}

TrajectorySample measure_sample(const StatePair& s, double t, double beta, const ReferenceValues& ref) {
    TrajectorySample x;
    x.t = t;
    x.mass = mass(s);
    x.kinetic = kinetic(s);
    x.potential = potential_P(s, beta);
    x.energy = 0.5 * x.kinetic - 0.25 * x.potential;
    x.delta = std::abs(x.kinetic - ref.K);
    x.h1norm = std::sqrt(x.kinetic + x.mass);
    return x;
}

std::optional<Verdict> detect_blowup(const std::vector<TrajectorySample>& samples, const EvolutionConfig& cfg,
                                     const ReferenceValues& ref) {
    if (samples.empty()) return std::nullopt;
    const TrajectorySample& last = samples.back();
    if (last.kinetic > cfg.blowup_K_factor * ref.K && last.tail_fraction > cfg.tail_fraction_tol) {
        return Verdict::blowup;
    }
    return std::nullopt;
}

std::optional<Verdict> detect_scattering(const std::vector<TrajectorySample>& samples,
                                         const EvolutionConfig& cfg, const ReferenceValues& ref) {
    if (samples.size() < 2) return std::nullopt;
    const double threshold = cfg.scatter_P_factor * ref.P;
    const TrajectorySample& last = samples.back();
    // Walk back over the trailing run of samples below the threshold.
    size_t first = samples.size();
    while (first > 0 && samples[first - 1].potential < threshold) --first;
    if (first == samples.size()) return std::nullopt;
    if (std::abs(last.t - samples[first].t) < cfg.scatter_window) return std::nullopt;
    // delta must not be heading to zero (that would be convergence to Q).
    if (last.delta < 0.9 * samples[first].delta) return std::nullopt;
    return Verdict::scatter;
}

TrajectoryRecord evolve(const StatePair& s0, const EvolutionConfig& cfg, const ReferenceValues& ref,
                        const SampleHook& hook) {
    cfg.validate();
    check_state(s0, "evolve");
    const double span = cfg.t_end - cfg.t_start;
    const long nsteps = std::max<long>(1, std::lround(std::abs(span) / cfg.dt));
    const double dt = span / static_cast<double>(nsteps);

    SplitStepper stepper(s0.grid, cfg.beta);
    TrajectoryRecord rec;
    StatePair s = s0;
    double max_K = 0.0;

    auto sample = [&](double t) {
        TrajectorySample x = measure_sample(s, t, cfg.beta, ref);
        x.tail_fraction = stepper.tail_fraction(s);
        if (hook) hook(s, x);
        if (!rec.samples.empty()) {
            const TrajectorySample& x0 = rec.samples.front();
            const double elapsed = std::max(std::abs(t - x0.t), 1.0);
            rec.max_energy_drift_rate = std::max(
                rec.max_energy_drift_rate, std::abs(x.energy - x0.energy) / std::abs(x0.energy) / elapsed);
            rec.max_mass_drift_rate =
                std::max(rec.max_mass_drift_rate, std::abs(x.mass - x0.mass) / x0.mass / elapsed);
        }
        max_K = std::max(max_K, x.kinetic);
        rec.samples.push_back(x);
    };

    if (span == 0.0) {
        sample(cfg.t_start);
        rec.final_state = s;
        rec.termination = "empty time span";
        rec.verdict = Verdict::undetermined;
        return rec;
    }

    sample(cfg.t_start);
    bool stopped = false;
    // The stepper keeps w = r u between steps; s is refreshed only for samples.
    stepper.load(s);
    for (long k = 1; k <= nsteps; ++k) {
        stepper.step_w(dt, cfg.integrator);
        ++rec.steps;
        const double t = cfg.t_start + dt * static_cast<double>(k);
        if (!stepper.finite()) {
            stepper.store(s);
            rec.termination = "non-finite state at t = " + std::to_string(t);
            rec.verdict = max_K > cfg.blowup_K_factor * ref.K ? Verdict::blowup : Verdict::undetermined;
            stopped = true;
            break;
        }
        if (k % cfg.sample_every == 0 || k == nsteps) {
            stepper.store(s);
            sample(t);
            if (cfg.detectors) {
                if (auto v = detect_blowup(rec.samples, cfg, ref)) {
                    rec.verdict = *v;
                    rec.termination = "blow-up detector fired";
                    stopped = true;
                    break;
                }
                if (auto v = detect_scattering(rec.samples, cfg, ref)) {
                    rec.verdict = *v;
                    rec.termination = "scattering indicator fired";
                    stopped = true;
                    break;
                }
            }
        }
    }
    if (!stopped) {
        rec.termination = "reached end of time span";
        const TrajectorySample& last = rec.samples.back();
        rec.verdict = last.delta < cfg.converge_delta_factor * ref.K ? Verdict::converge_to_Q : Verdict::undetermined;
    }
    rec.energy_drift_flag = rec.max_energy_drift_rate > cfg.energy_drift_tol;
    if (rec.energy_drift_flag) {
        std::ostringstream msg;
        msg << "evolve: relative energy drift " << rec.max_energy_drift_rate << " per unit time exceeds "
            << cfg.energy_drift_tol;
        log_warning(msg.str());
    }
    rec.final_state = s;
    return rec;
}

}  // namespace nlslab
