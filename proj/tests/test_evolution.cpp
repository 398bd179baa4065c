// Split-step integration, conservation and trajectory classification.
#include "doctest.h"

#include "nlslab/errors.hpp"
#include "nlslab/evolution.hpp"
#include "nlslab/ground_state.hpp"

#include <cmath>
#include <random>

using namespace nlslab;

namespace {

double l2(const StatePair& s) { return std::sqrt(mass(s)); }

StatePair gaussian(const GridPtr& g, double amplitude, bool both = true) {
    RVec f = (amplitude * (-g->r().array().square()).exp()).matrix();
    f(g->size() - 1) = 0.0;
    return StatePair::from_real(g, f, both ? f : RVec::Zero(g->size()));
}

EvolutionConfig config(double beta, double t0, double t1) {
    EvolutionConfig c;
    c.beta = beta;
    c.t_start = t0;
    c.t_end = t1;
    return c;
}

}  // namespace

TEST_CASE("configuration checks") {
    EvolutionConfig c;
    c.dt = 0.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = EvolutionConfig{};
    c.blowup_K_factor = 1.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = EvolutionConfig{};
    c.tail_fraction_tol = 0.5;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    CHECK(parse_integrator("strang") == Integrator::strang);
    CHECK_THROWS_AS(parse_integrator("euler"), ConfigError);
    CHECK(verdict_flag(Verdict::undetermined) == 0);
    CHECK(verdict_flag(Verdict::converge_to_Q) == 1);
}

TEST_CASE("free flow") {
    const GridPtr g = make_grid(4096, 30.0);
    const StatePair s = gaussian(g, 1.0, false);
    CHECK(l2(free_propagate(s, 0.0) - s) <= 1e-14 * l2(s));
    const StatePair s1 = free_propagate(s, 0.7);
    CHECK(std::abs(mass(s1) - mass(s)) / mass(s) <= 1e-12);
    const StatePair composed = free_propagate(free_propagate(s, 0.3), 0.4);
    CHECK(l2(composed - s1) <= 1e-10 * l2(s));

    // Closed form: e^{it Delta} e^{-r^2} = (1 + 4it)^{-3/2} e^{-r^2 / (1 + 4it)}.
    const double t = 1.0;
    const cplx den(1.0, 4.0 * t);
    CVec exact(g->size());
    for (int i = 0; i < g->size(); ++i) exact(i) = std::pow(den, -1.5) * std::exp(-g->r()(i) * g->r()(i) / den);
    exact(g->size() - 1) = 0.0;
    const StatePair ex(g, exact, CVec::Zero(g->size()));
    CHECK(l2(free_propagate(s, t) - ex) <= 1e-6 * l2(ex));

    // The split-step scheme with a vanishing nonlinearity reproduces it.
    const double a = 1e-6;
    StatePair x = a * s;
    SplitStepper stepper(g, 3.0);
    for (int k = 0; k < 1000; ++k) stepper.strang_step(x, 1e-3);
    CHECK(l2(x - a * ex) <= 1e-6 * a * l2(ex));
}

TEST_CASE("single steps are isometries") {
    const GridPtr g = make_grid(2048, 30.0);
    const GroundStatePtr gs = build_ground_state(3.0, Branch::symmetric, g);
    const StatePair s = 1.1 * gs->Q;
    const StatePair s1 = strang_step(s, 1e-3, 3.0);
    CHECK(std::abs(mass(s1) - mass(s)) / mass(s) <= 1e-12);
}

TEST_CASE("energy drift is second order for the plain splitting") {
    const GridPtr g = make_grid(2048, 30.0);
    const GroundStatePtr gs = build_ground_state(3.0, Branch::symmetric, g);
    const StatePair s0 = gaussian(g, 1.2);
    auto drift = [&](double dt) {
        EvolutionConfig c = config(3.0, 0.0, 0.5);
        c.dt = dt;
        c.integrator = Integrator::strang;
        c.detectors = false;
        const TrajectoryRecord r = evolve(s0, c, gs->reference());
        return std::abs(r.samples.back().energy - r.samples.front().energy);
    };
    const double d1 = drift(4e-3), d2 = drift(2e-3);
    CAPTURE(d1);
    CAPTURE(d2);
    CHECK(d1 / d2 == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("standing wave over a short horizon") {
    const GridPtr g = make_grid(4096, 30.0);
    const GroundStatePtr gs = build_ground_state(3.0, Branch::symmetric, g);
    EvolutionConfig c = config(3.0, 0.0, 1.0);
    double worst = 0.0;
    const TrajectoryRecord r = evolve(gs->Q, c, gs->reference(), [&](const StatePair& s, TrajectorySample& x) {
        worst = std::max(worst, h1_norm(s - std::polar(1.0, x.t) * gs->Q));
    });
    CHECK(r.verdict == Verdict::converge_to_Q);
    CHECK(worst <= 1e-6);
    CHECK(r.max_mass_drift_rate <= 1e-12);
    CHECK(r.max_energy_drift_rate <= 1e-8);
    CHECK_FALSE(r.energy_drift_flag);
}

TEST_CASE("gauge covariance and time reversal") {
    const GridPtr g = make_grid(2048, 30.0);
    const GroundStatePtr gs = build_ground_state(3.0, Branch::symmetric, g);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> ph(0.0, 2.0 * M_PI);
    const StatePair s = 0.9 * gs->Q + gaussian(g, 0.1);
    EvolutionConfig c = config(3.0, 0.0, 1.0);
    c.detectors = false;
    const TrajectoryRecord base = evolve(s, c, gs->reference());

    const double a = ph(rng), b = ph(rng);
    const StatePair rot(g, std::polar(1.0, a) * s.u, std::polar(1.0, b) * s.v);
    const TrajectoryRecord rr = evolve(rot, c, gs->reference());
    const StatePair expect(g, std::polar(1.0, a) * base.final_state.u, std::polar(1.0, b) * base.final_state.v);
    CHECK(l2(rr.final_state - expect) <= 1e-10 * l2(expect));

    EvolutionConfig back = config(3.0, 0.0, -1.0);
    back.detectors = false;
    const TrajectoryRecord rb = evolve(s.conj(), back, gs->reference());
    CHECK(l2(rb.final_state - base.final_state.conj()) <= 1e-8 * l2(s));
}

TEST_CASE("detectors on synthetic records") {
    const ReferenceValues ref{3.0, 9.0, 27.0, 4.5, 36.0};
    EvolutionConfig c;
    std::vector<TrajectorySample> xs(1);
    xs[0].kinetic = 6.0 * ref.K;
    xs[0].tail_fraction = 1e-9;
    CHECK_FALSE(detect_blowup(xs, c, ref).has_value());  // growth without tail saturation
    xs[0].tail_fraction = 1e-3;
    CHECK(detect_blowup(xs, c, ref) == Verdict::blowup);

    std::vector<TrajectorySample> ys;
    for (int k = 0; k <= 20; ++k) {
        TrajectorySample y;
        y.t = 0.1 * k;
        y.potential = 0.001 * ref.P;
        y.delta = 20.0;
        ys.push_back(y);
    }
    CHECK(detect_scattering(ys, c, ref) == Verdict::scatter);
    for (auto& y : ys) y.delta = 20.0 * std::exp(-y.t);  // heading back to Q
    CHECK_FALSE(detect_scattering(ys, c, ref).has_value());
    ys.resize(5);  // window too short
    for (auto& y : ys) y.delta = 20.0;
    CHECK_FALSE(detect_scattering(ys, c, ref).has_value());
}

TEST_CASE("trajectory classification") {
    const GridPtr g = make_grid(4096, 30.0);
    const GroundStatePtr gs = build_ground_state(3.0, Branch::symmetric, g);
    const ReferenceValues ref = gs->reference();

    SUBCASE("small Gaussian data scatter") {
        const StatePair s = gaussian(g, 0.5);
        CHECK(mk_ratio(s, ref) < 0.1);
        CHECK(me_ratio(s, ref) < 0.1);
        const TrajectoryRecord r = evolve(s, config(3.0, 0.0, 5.0), ref);
        CHECK(r.verdict == Verdict::scatter);
    }
    SUBCASE("1.2 Q blows up") {
        const StatePair s = 1.2 * gs->Q;
        CHECK(mk_ratio(s, ref) > 1.0);
        CHECK(me_ratio(s, ref) < 1.0);
        const TrajectoryRecord r = evolve(s, config(3.0, 0.0, 3.0), ref);
        CHECK(r.verdict == Verdict::blowup);
        CHECK(r.samples.back().kinetic > 5.0 * ref.K);
    }
    SUBCASE("empty record") {
        const TrajectoryRecord r = evolve(gs->Q, config(3.0, 0.5, 0.5), ref);
        CHECK(r.samples.size() == 1);
        CHECK(r.verdict == Verdict::undetermined);
    }
}
