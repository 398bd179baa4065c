#include "nlslab/runner.hpp"

#include "nlslab/errors.hpp"
#include "nlslab/modulation.hpp"
#include "nlslab/special_solutions.hpp"
#include "nlslab/state_io.hpp"
#include "nlslab/virial.hpp"

#include "json.hpp"
#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#ifndef NLSLAB_VERSION
#define NLSLAB_VERSION "unknown"
#endif

namespace nlslab {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::string num(double v) {
    if (!std::isfinite(v)) return "";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

// Writes through a temporary file; the target appears only when complete.
void write_text_atomic(const fs::path& path, const std::string& text) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw NumericError("cannot open '" + tmp.string() + "' for writing");
        out << text;
        out.flush();
        if (!out) {
            out.close();
            fs::remove(tmp);
            throw NumericError("write to '" + tmp.string() + "' failed");
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        throw NumericError("cannot move '" + tmp.string() + "' into place: " + ec.message());
    }
}

json fit_json(const DecayFit& f) {
    return json{{"quantity", f.quantity},
                {"window", json::array({f.t_lo, f.t_hi})},
                {"rate", f.rate},
                {"amplitude", f.amplitude},
                {"residual", f.residual}};
}

std::string utc_now() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream out;
    out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return out.str();
}

// Per-run output bookkeeping.
class RunContext {
public:
    explicit RunContext(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

    const fs::path& dir() const { return dir_; }
    fs::path path(const std::string& rel) const { return dir_ / rel; }

    void write_text(const std::string& rel, const std::string& text) {
        const fs::path p = path(rel);
        if (p.has_parent_path()) fs::create_directories(p.parent_path());
        write_text_atomic(p, text);
        add(rel);
    }
    void write_json(const std::string& rel, const json& j) { write_text(rel, j.dump(2) + "\n"); }
    void add(const std::string& rel) {
        std::lock_guard<std::mutex> lock(mu_);
        if (std::find(produced_.begin(), produced_.end(), rel) == produced_.end()) produced_.push_back(rel);
    }
    const std::vector<std::string>& produced() const { return produced_; }

private:
    fs::path dir_;
    std::mutex mu_;
    std::vector<std::string> produced_;
};

GroundStatePtr build_gs(const ExperimentConfig& cfg) {
    return build_ground_state(cfg.beta, cfg.branch, make_grid(cfg.grid.n_points, cfg.grid.r_max));
}

struct SpectrumBundle {
    SectorPtr op;
    SpectralPtr sd;
};

SpectrumBundle build_spectrum(const GroundStatePtr& gs) {
    auto op = std::make_shared<const SectorOperator>(assemble_sector(gs, 0));
    auto sd = std::make_shared<const SpectralData>(compute_spectrum(*op));
    return {op, sd};
}

SummaryFragment base_summary(const ExperimentConfig& cfg) {
    SummaryFragment s;
    s.beta = cfg.beta;
    s.branch = cfg.branch;
    return s;
}

// ---------------------------------------------------------------- ground

void run_ground(const ExperimentConfig& cfg, RunContext& ctx, RunManifest& m) {
    const GroundStatePtr gs = build_gs(cfg);
    const auto [km, pm] = pohozaev_residuals(*gs);
    const GnConstants gn = gn_constant_forms(*gs);
    const double gn_equality = std::abs(gs->P - gs->c_gn * std::sqrt(gs->M) * std::pow(gs->K, 1.5)) / gs->P;
    json j{{"beta", cfg.beta},
           {"branch", to_string(cfg.branch)},
           {"n_points", cfg.grid.n_points},
           {"r_max", cfg.grid.r_max},
           {"phi0", gs->scalar.phi0},
           {"M", gs->M},
           {"K", gs->K},
           {"E", gs->E},
           {"P", gs->P},
           {"c_gn", gs->c_gn},
           {"c_gn_forms", {{"from_mk", gn.from_mk}, {"from_me", gn.from_me}, {"relative_gap", gn.relative_gap}}},
           {"gn_equality_residual", gn_equality},
           {"pohozaev", {{"kinetic_mass", km}, {"potential_mass", pm}}},
           {"ode_residual", gs->scalar.ode_residual}};
    ctx.write_json("ground.json", j);
    write_summary_json(base_summary(cfg), ctx.path("summary.json").string());
    ctx.add("summary.json");
    m.metrics = {{"M", gs->M}, {"K", gs->K}, {"P", gs->P}, {"c_gn", gs->c_gn},
                 {"pohozaev_km", km}, {"pohozaev_pm", pm}, {"gn_gap", gn.relative_gap}};
}

// ---------------------------------------------------------------- spectrum

void run_spectrum(const ExperimentConfig& cfg, RunContext& ctx, RunManifest& m) {
    const GroundStatePtr gs = build_gs(cfg);
    const SpectrumBundle sp = build_spectrum(gs);
    const KernelReport k0 = kernel_basis(*sp.op);
    const SectorOperator op1 = assemble_sector(gs, 1);
    const KernelReport k1 = kernel_basis(op1);
    const CoercivityReport coer = coercivity_report(*sp.op, *sp.sd, true);
    const double y2 = h1_norm_sq(sp.sd->Yplus);
    json j{{"beta", cfg.beta},
           {"branch", to_string(cfg.branch)},
           {"e0", sp.sd->e0},
           {"e0_seed", sp.sd->e0_seed},
           {"coercivity_c", coer.c},
           {"coercivity", {{"real_part", coer.real_part}, {"imag_part", coer.imag_part}}},
           {"kernel_dims",
            {{"l0", {{"LR", k0.dim_LR}, {"LI", k0.dim_LI}, {"negative_LR", k0.negative_LR}, {"negative_LI", k0.negative_LI}}},
             {"l1", {{"LR", k1.dim_LR}, {"LI", k1.dim_LI}, {"negative_LR", k1.negative_LR}, {"negative_LI", k1.negative_LI}}}}},
           {"residuals",
            {{"eigen", sp.sd->eigen_residual},
             {"phi_plus_relative", std::abs(sp.sd->phi_plus) / y2},
             {"phi_minus_relative", std::abs(sp.sd->phi_minus) / y2},
             {"normalization", sp.sd->normalization}}}};
    ctx.write_json("spectrum.json", j);
    SummaryFragment s = base_summary(cfg);
    s.e0 = sp.sd->e0;
    write_summary_json(s, ctx.path("summary.json").string());
    ctx.add("summary.json");
    m.metrics = {{"e0", sp.sd->e0}, {"eigen_residual", sp.sd->eigen_residual}, {"coercivity_c", coer.c},
                 {"kernel_LR_l0", k0.dim_LR}, {"kernel_LI_l0", k0.dim_LI}};
}

// ---------------------------------------------------------------- special

struct SeedBundle {
    GroundStatePtr gs;
    SpectrumBundle sp;
    FrequencySeries series;
    double t0 = 0.0;
    StatePair seed;
};

SeedBundle build_seed(const ExperimentConfig& cfg) {
    SeedBundle b;
    b.gs = build_gs(cfg);
    b.sp = build_spectrum(b.gs);
    b.series = build_Z_sequence(b.sp.op, b.sp.sd, cfg.special.A, cfg.special.l);
    b.t0 = cfg.special.t0_mode == T0Mode::fixed ? cfg.special.t0 : auto_t0(b.series, cfg.special.t0_fraction);
    b.seed = initial_data_UA(b.series, b.t0);
    return b;
}

void run_special(const ExperimentConfig& cfg, RunContext& ctx, RunManifest& m) {
    const SeedBundle b = build_seed(cfg);
    const GroundState& gs = *b.gs;
    write_state_file(ctx.path("seed.state").string(), b.seed, cfg.beta, b.t0, b.t0);
    ctx.add("seed.state");
    const double k_seed = kinetic(b.seed);
    json j{{"beta", cfg.beta},
           {"branch", to_string(cfg.branch)},
           {"e0", b.series.e0},
           {"A", cfg.special.A},
           {"l", cfg.special.l},
           {"t0", b.t0},
           {"t0_mode", cfg.special.t0_mode == T0Mode::automatic ? "auto" : "fixed"},
           {"t0_fraction", cfg.special.t0_fraction},
           {"z_residuals", b.series.solve_residual},
           {"eps_l_h1_at_t0", h1_norm(residual_epsilon(b.series, b.t0))},
           {"seed_ratio", h1_norm(eval_V(b.series, b.t0)) / h1_norm(gs.Q)},
           {"K_seed_minus_KQ", k_seed - gs.K},
           {"M_seed_minus_MQ", mass(b.seed) - gs.M},
           {"E_seed_minus_EQ", energy(b.seed, gs.beta) - gs.E},
           {"T_A", cfg.special.A != 0.0 ? json(time_shift_TA(cfg.special.A, b.series.e0)) : json(nullptr)}};
    ctx.write_json("special.json", j);
    SummaryFragment s = base_summary(cfg);
    s.e0 = b.series.e0;
    write_summary_json(s, ctx.path("summary.json").string());
    ctx.add("summary.json");
    m.metrics = {{"e0", b.series.e0}, {"t0", b.t0}, {"K_seed_minus_KQ", k_seed - gs.K}};
}

// ---------------------------------------------------------------- evolve

StatePair gaussian_data(const GridPtr& grid, const ExperimentConfig& cfg) {
    const RVec& r = grid->r();
    RVec g = cfg.evolution.gaussian_amplitude * (-(r.array() / cfg.evolution.gaussian_width).square()).exp().matrix();
    g(grid->size() - 1) = 0.0;  // wall node
    const bool first = cfg.branch != Branch::semi_trivial_second;
    const bool second = cfg.branch != Branch::semi_trivial_first;
    return StatePair::from_real(grid, first ? g : RVec::Zero(g.size()), second ? g : RVec::Zero(g.size()));
}

std::pair<double, double> resolve_span(const ExperimentConfig& cfg, double natural_start) {
    if (cfg.evolution.t_span) return *cfg.evolution.t_span;
    return {natural_start, natural_start + cfg.evolution.direction * cfg.evolution.duration};
}

std::vector<DecayFit> trajectory_fits(const TrajectoryRecord& rec, const ExperimentConfig& cfg, double e0) {
    std::vector<DecayFit> fits;
    if (rec.samples.size() < 2) return fits;
    const double t_first = rec.samples.front().t;
    const double t_last = rec.samples.back().t;
    const bool forward = t_last > t_first;
    if (!forward) return fits;  // decay fits describe forward convergence
    std::pair<double, double> window;
    if (cfg.diagnostics.fit_window) {
        window = *cfg.diagnostics.fit_window;
    } else {
        if (rec.verdict != Verdict::converge_to_Q) return fits;
        // Leading-order window: four e-folds of the unstable mode after the seed time.
        const double span = std::isfinite(e0) && e0 > 0.0 ? 4.0 / e0 : 0.5 * (t_last - t_first);
        window = {t_first, std::min(t_last, t_first + span)};
    }
    auto column = [&](auto getter) {
        std::vector<double> v;
        for (const auto& s : rec.samples) v.push_back(getter(s));
        return v;
    };
    const auto t = column([](const TrajectorySample& s) { return s.t; });
    auto try_fit = [&](const std::string& name, const std::vector<double>& y) {
        try {
            fits.push_back(fit_exponential_decay(t, y, window.first, window.second, name));
        } catch (const NumericError& e) {
            log_warning(std::string("fit skipped: ") + e.what());
        }
    };
    try_fit("delta", column([](const TrajectorySample& s) { return s.delta; }));
    if (cfg.diagnostics.projections) {
        try_fit("alpha_plus", column([](const TrajectorySample& s) { return std::abs(s.alpha_plus); }));
        try_fit("alpha_minus", column([](const TrajectorySample& s) { return std::abs(s.alpha_minus); }));
        try_fit("beta_sum", column([](const TrajectorySample& s) { return s.beta_sum; }));
    }
    return fits;
}

void run_evolve(const ExperimentConfig& cfg, RunContext& ctx, RunManifest& m) {
    GroundStatePtr gs;
    std::optional<SpectrumBundle> sp;
    StatePair s0;
    double natural_start = 0.0;
    switch (cfg.evolution.initial) {
        case InitialKind::ground:
            gs = build_gs(cfg);
            s0 = gs->Q;
            break;
        case InitialKind::scaled_ground:
            gs = build_gs(cfg);
            s0 = cfg.evolution.initial_scale * gs->Q;
            break;
        case InitialKind::gaussian:
            gs = build_gs(cfg);
            s0 = gaussian_data(gs->grid, cfg);
            break;
        case InitialKind::special: {
            SeedBundle b = build_seed(cfg);
            gs = b.gs;
            sp = b.sp;
            s0 = b.seed;
            natural_start = b.t0;
            break;
        }
        case InitialKind::state: {
            const StateFile f = read_state_file(cfg.evolution.state_file);
            if (f.state.size() != cfg.grid.n_points || f.state.grid->r_max() != cfg.grid.r_max) {
                throw ConfigError("state file grid (" + std::to_string(f.state.size()) + ", " + num(f.state.grid->r_max()) +
                                  ") differs from the configured grid");
            }
            if (f.beta != cfg.beta) throw ConfigError("state file beta " + num(f.beta) + " differs from the configured beta");
            gs = build_gs(cfg);
            s0 = StatePair(gs->grid, f.state.u, f.state.v);
            natural_start = f.t;
            break;
        }
    }
    if (cfg.diagnostics.projections && !sp) sp = build_spectrum(gs);

    EvolutionConfig ec = cfg.evolution_config();
    std::tie(ec.t_start, ec.t_end) = resolve_span(cfg, natural_start);

    const SampleHook modulation = cfg.diagnostics.modulation ? modulation_hook(gs, cfg.diagnostics.delta0) : SampleHook{};
    long sample_index = 0;
    const int snap_every = cfg.evolution.snapshot_every;
    auto hook = [&](const StatePair& s, TrajectorySample& x) {
        if (modulation) modulation(s, x);
        if (sp) {
            const StatePair w = std::polar(1.0, -x.t) * s - gs->Q;
            const SpectralProjection p = spectral_project(*sp->op, *sp->sd, w);
            x.alpha_plus = p.alpha_plus;
            x.alpha_minus = p.alpha_minus;
            double bsum = 0.0;
            for (double b : p.beta) bsum += std::abs(b);
            x.beta_sum = bsum;
        }
        if (snap_every > 0 && sample_index % snap_every == 0) {
            std::ostringstream name;
            name << "snapshots/state_" << std::setw(6) << std::setfill('0') << sample_index << ".state";
            fs::create_directories(ctx.path("snapshots"));
            write_state_file(ctx.path(name.str()).string(), s, cfg.beta, x.t, x.t);
            ctx.add(name.str());
        }
        ++sample_index;
    };
    const TrajectoryRecord rec = evolve(s0, ec, gs->reference(), hook);

    write_timeseries_csv(rec, ctx.path("trajectory.csv").string());
    ctx.add("trajectory.csv");
    write_state_file(ctx.path("final.state").string(), rec.final_state, cfg.beta, rec.samples.back().t,
                     rec.samples.back().t);
    ctx.add("final.state");

    const double e0 = sp ? sp->sd->e0 : kNaN;
    SummaryFragment summary = base_summary(cfg);
    summary.e0 = e0;
    summary.verdicts = {to_string(rec.verdict)};
    summary.fits = trajectory_fits(rec, cfg, e0);
    write_summary_json(summary, ctx.path("summary.json").string());
    ctx.add("summary.json");

    const TrajectorySample& last = rec.samples.back();
    json j{{"initial", to_string(cfg.evolution.initial)},
           {"t_start", ec.t_start},
           {"t_end", ec.t_end},
           {"t_final", last.t},
           {"steps", rec.steps},
           {"integrator", to_string(ec.integrator)},
           {"verdict", to_string(rec.verdict)},
           {"termination", rec.termination},
           {"energy_drift_flag", rec.energy_drift_flag},
           {"max_energy_drift_rate", rec.max_energy_drift_rate},
           {"max_mass_drift_rate", rec.max_mass_drift_rate},
           {"final_delta", last.delta},
           {"final_tail_fraction", last.tail_fraction}};
    ctx.write_json("evolve.json", j);
    m.verdicts["evolve"] = to_string(rec.verdict);
    m.metrics = {{"final_delta", last.delta}, {"t_final", last.t}, {"verdict_flag", verdict_flag(rec.verdict)},
                 {"max_energy_drift_rate", rec.max_energy_drift_rate}, {"max_mass_drift_rate", rec.max_mass_drift_rate}};
    for (const auto& f : summary.fits) m.metrics["fit_rate_" + f.quantity] = f.rate;
    if (rec.verdict == Verdict::undetermined) m.exit_status = kExitUndetermined;
}

// ---------------------------------------------------------------- virial / modulate

std::vector<StateFile> load_snapshots(const ExperimentConfig& cfg, const GroundState& gs) {
    if (cfg.diagnostics.input_dir.empty()) throw ConfigError("diagnostics.input_dir is required (an evolve output directory)");
    const fs::path dir = fs::path(cfg.diagnostics.input_dir) / "snapshots";
    if (!fs::is_directory(dir)) {
        throw ConfigError("'" + dir.string() + "' does not exist; run evolve with evolution.snapshot_every > 0");
    }
    std::vector<fs::path> paths;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.path().extension() == ".state") paths.push_back(e.path());
    }
    std::sort(paths.begin(), paths.end());
    std::vector<StateFile> out;
    for (const auto& p : paths) {
        StateFile f = read_state_file(p.string());
        if (f.state.size() != gs.grid->size() || f.state.grid->r_max() != gs.grid->r_max() || f.beta != gs.beta) {
            throw ConfigError("snapshot '" + p.string() + "' does not match the configured grid / beta");
        }
        f.state = StatePair(gs.grid, f.state.u, f.state.v);
        out.push_back(std::move(f));
    }
    if (out.size() < 3) throw ConfigError("need at least three snapshots in '" + dir.string() + "'");
    return out;
}

// Second derivative at interior point i of non-uniform samples.
double second_difference(const std::vector<double>& t, const std::vector<double>& y, size_t i) {
    const double h0 = t[i] - t[i - 1], h1 = t[i + 1] - t[i];
    return 2.0 * (h0 * y[i + 1] - (h0 + h1) * y[i] + h1 * y[i - 1]) / (h0 * h1 * (h0 + h1));
}

double first_difference(const std::vector<double>& t, const std::vector<double>& y, size_t i) {
    const double h0 = t[i] - t[i - 1], h1 = t[i + 1] - t[i];
    return (h0 * h0 * y[i + 1] - h1 * h1 * y[i - 1] + (h1 * h1 - h0 * h0) * y[i]) / (h0 * h1 * (h0 + h1));
}

void run_virial(const ExperimentConfig& cfg, RunContext& ctx, RunManifest& m) {
    const GroundStatePtr gs = build_gs(cfg);
    const std::vector<StateFile> snaps = load_snapshots(cfg, *gs);
    const VirialWeight w(cfg.diagnostics.virial_weight, cfg.diagnostics.virial_R);
    sample_weight(w, *gs->grid);  // rejects a transition region beyond r_max
    const size_t n = snaps.size();
    std::vector<double> t(n), V(n), Vp(n), AR(n), K(n), ident(n), printed(n), dl(n);
    std::vector<std::string> regime(n);
    // Samples are independent: evaluate them concurrently.
    std::vector<std::thread> pool;
    std::atomic<size_t> next{0};
    const unsigned workers = std::max(1u, std::min(8u, std::thread::hardware_concurrency()));
    for (unsigned k = 0; k < workers; ++k) {
        pool.emplace_back([&] {
            for (size_t i = next++; i < n; i = next++) {
                const StatePair& s = snaps[i].state;
                t[i] = snaps[i].t;
                K[i] = kinetic(s);
                dl[i] = std::abs(K[i] - gs->K);
                V[i] = virial_V(s, w);
                Vp[i] = virial_Vprime(s, w);
                AR[i] = virial_AR(s, w, gs->beta);
                const bool high = K[i] >= gs->K;
                regime[i] = high ? "high" : "low";
                ident[i] = (high ? -4.0 : 4.0) * dl[i] + AR[i];
                printed[i] = (high ? -4.0 : 2.0) * dl[i] + AR[i];
            }
        });
    }
    for (auto& th : pool) th.join();

    std::ostringstream csv;
    csv << "t,kinetic,delta,regime,V,Vprime,AR,identity,identity_printed,Vsecond_fd,Vprime_fd\n";
    double worst = 0.0, worst_printed = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double fd2 = kNaN, fd1 = kNaN;
        if (i > 0 && i + 1 < n) {
            fd2 = second_difference(t, V, i);
            fd1 = first_difference(t, V, i);
            if (std::abs(ident[i]) > 0.0) {
                worst = std::max(worst, std::abs(fd2 - ident[i]) / std::abs(ident[i]));
                worst_printed = std::max(worst_printed, std::abs(fd2 - printed[i]) / std::abs(printed[i]));
            }
        }
        csv << num(t[i]) << ',' << num(K[i]) << ',' << num(dl[i]) << ',' << regime[i] << ',' << num(V[i]) << ','
            << num(Vp[i]) << ',' << num(AR[i]) << ',' << num(ident[i]) << ',' << num(printed[i]) << ',' << num(fd2)
            << ',' << num(fd1) << '\n';
    }
    ctx.write_text("virial.csv", csv.str());

    json banica = json::object();
    if (w.mode() != WeightMode::exact_quadratic) {
        double max_ratio = 0.0;
        int used = 0, skipped = 0;
        for (const auto& f : snaps) {
            try {
                const BanicaGap g = banica_gap(f.state, w, *gs);
                if (std::isfinite(g.ratio)) max_ratio = std::max(max_ratio, g.ratio);
                ++used;
            } catch (const ConfigError&) {
                ++skipped;  // off the threshold
            }
        }
        banica = json{{"max_ratio", max_ratio}, {"samples", used}, {"skipped_off_threshold", skipped}};
    }
    json j{{"weight", to_string(w.mode())},
           {"R", w.R()},
           {"gradient_constant", w.gradient_constant(*gs->grid)},
           {"max_a2", w.max_a2(*gs->grid)},
           {"AR_of_Q", virial_AR(gs->Q, w, gs->beta)},
           {"snapshots", n},
           {"max_relative_mismatch", worst},
           {"max_relative_mismatch_printed_low", worst_printed},
           {"banica", banica}};
    ctx.write_json("virial.json", j);
    write_summary_json(base_summary(cfg), ctx.path("summary.json").string());
    ctx.add("summary.json");
    m.metrics = {{"max_relative_mismatch", worst}, {"AR_of_Q", virial_AR(gs->Q, w, gs->beta)}};
}

void run_modulate(const ExperimentConfig& cfg, RunContext& ctx, RunManifest& m) {
    const GroundStatePtr gs = build_gs(cfg);
    const std::vector<StateFile> snaps = load_snapshots(cfg, *gs);
    std::ostringstream csv;
    csv << "t,delta,alpha,theta0,theta1,remainder_h1,alpha_over_delta,remainder_over_delta,orthogonality_residual,"
           "newton_iterations,converged\n";
    std::vector<double> ts, ds, as;
    double a_lo = INFINITY, a_hi = 0.0, r_lo = INFINITY, r_hi = 0.0, orth = 0.0;
    std::optional<std::pair<double, double>> guess;
    std::vector<double> theta_t, theta0;
    int used = 0, failed = 0;
    for (const auto& f : snaps) {
        const double d = std::abs(kinetic(f.state) - gs->K);
        if (!(d < cfg.diagnostics.delta0 * gs->K)) {
            guess.reset();
            continue;
        }
        const Modulation mo = modulation_solve(f.state, *gs, cfg.diagnostics.delta0, guess);
        const double rem = h1_norm(mo.remainder);
        ++used;
        if (!mo.converged) {
            ++failed;
            guess.reset();
        } else {
            guess = std::make_pair(mo.theta0, mo.theta1);
        }
        csv << num(f.t) << ',' << num(d) << ',' << num(mo.alpha) << ',' << num(mo.theta0) << ',' << num(mo.theta1) << ','
            << num(rem) << ',' << num(d > 0 ? std::abs(mo.alpha) / d : kNaN) << ',' << num(d > 0 ? rem / d : kNaN) << ','
            << num(mo.orthogonality_residual) << ',' << mo.newton_iterations << ',' << (mo.converged ? 1 : 0) << '\n';
        if (d > 0) {
            a_lo = std::min(a_lo, std::abs(mo.alpha) / d);
            a_hi = std::max(a_hi, std::abs(mo.alpha) / d);
            r_lo = std::min(r_lo, rem / d);
            r_hi = std::max(r_hi, rem / d);
        }
        orth = std::max(orth, mo.orthogonality_residual);
        ts.push_back(f.t);
        ds.push_back(d);
        as.push_back(std::abs(mo.alpha));
        theta_t.push_back(f.t);
        theta0.push_back(mo.theta0);
    }
    ctx.write_text("modulation.csv", csv.str());
    // |theta'(t) - 1| / delta(t) from unwrapped phases.
    double theta_defect = 0.0;
    for (size_t i = 1; i < theta0.size(); ++i) {
        double dth = std::remainder(theta0[i] - theta0[i - 1], 2.0 * M_PI);
        const double rate = dth / (theta_t[i] - theta_t[i - 1]);
        const double dmid = 0.5 * (ds[i] + ds[i - 1]);
        if (dmid > 0) theta_defect = std::max(theta_defect, std::abs(rate - 1.0) / dmid);
    }
    json j{{"delta0", cfg.diagnostics.delta0},
           {"samples", used},
           {"newton_failures", failed},
           {"band_alpha_over_delta", used ? json::array({a_lo, a_hi}) : json(nullptr)},
           {"band_remainder_over_delta", used ? json::array({r_lo, r_hi}) : json(nullptr)},
           {"max_orthogonality_residual", orth},
           {"max_theta_rate_defect_over_delta", theta_defect}};
    ctx.write_json("modulation.json", j);
    SummaryFragment summary = base_summary(cfg);
    if (ts.size() >= 10 && ts.back() > ts.front()) {
        const auto window = cfg.diagnostics.fit_window.value_or(std::make_pair(ts.front(), ts.back()));
        for (const auto& [name, series] : {std::make_pair(std::string("delta"), ds), std::make_pair(std::string("alpha"), as)}) {
            try {
                summary.fits.push_back(fit_exponential_decay(ts, series, window.first, window.second, name));
            } catch (const NumericError& e) {
                log_warning(std::string("fit skipped: ") + e.what());
            }
        }
    }
    write_summary_json(summary, ctx.path("summary.json").string());
    ctx.add("summary.json");
    m.metrics = {{"samples", static_cast<double>(used)}, {"max_orthogonality_residual", orth}};
    if (failed > 0) m.verdicts["modulation"] = "newton_failures";
}

// ---------------------------------------------------------------- sweep

void run_sweep(const ExperimentConfig& cfg, RunContext& ctx, RunManifest& m) {
    if (cfg.sweep.values.empty()) throw ConfigError("sweep.values is empty");
    const Subcommand sub = parse_subcommand(cfg.sweep.subcommand);
    const size_t n = cfg.sweep.values.size();
    std::vector<RunManifest> results(n);
    std::vector<std::string> dirs(n);
    std::vector<std::string> setup_errors(n);
    for (size_t i = 0; i < n; ++i) dirs[i] = cfg.sweep.axis + "_" + std::to_string(i);

    auto configure = [&](size_t i) {
        ExperimentConfig c = cfg;
        const double v = cfg.sweep.values[i];
        if (cfg.sweep.axis == "beta") {
            c.beta = v;
            // Each coupling regime has its own ground-state branch.
            if (v < 1.0 && c.branch == Branch::symmetric) c.branch = Branch::semi_trivial_first;
            if (v > 1.0 && c.branch != Branch::symmetric) c.branch = Branch::symmetric;
        } else if (cfg.sweep.axis == "A") {
            c.special.A = v;
        } else if (cfg.sweep.axis == "l") {
            if (v != std::round(v)) throw ConfigError("sweep over l needs integer values");
            c.special.l = static_cast<int>(v);
        } else {
            if (v != std::round(v)) throw ConfigError("sweep over resolution needs integer values");
            c.grid.n_points = static_cast<int>(v);
        }
        c.output_dir = ctx.path(dirs[i]).string();
        c.validate();
        return c;
    };

    std::atomic<size_t> next{0};
    const int workers = std::max(1, std::min<int>(cfg.sweep.workers, static_cast<int>(n)));
    std::vector<std::thread> pool;
    for (int k = 0; k < workers; ++k) {
        pool.emplace_back([&] {
            for (size_t i = next++; i < n; i = next++) {
                try {
                    results[i] = run_experiment(configure(i), sub);
                } catch (const std::exception& e) {
                    results[i].exit_status = dynamic_cast<const ConfigError*>(&e) ? kExitConfig : kExitNumeric;
                    results[i].error = e.what();
                }
            }
        });
    }
    for (auto& th : pool) th.join();

    std::ostringstream csv;
    csv << "axis,value,directory,exit_status,e0,pohozaev_km,pohozaev_pm,K_seed_minus_KQ,verdict\n";
    json runs = json::array();
    int worst = kExitOk;
    for (size_t i = 0; i < n; ++i) {
        const RunManifest& r = results[i];
        auto metric = [&](const std::string& k) {
            const auto it = r.metrics.find(k);
            return it == r.metrics.end() ? kNaN : it->second;
        };
        const auto vit = r.verdicts.find("evolve");
        const std::string verdict = vit == r.verdicts.end() ? "" : vit->second;
        csv << cfg.sweep.axis << ',' << num(cfg.sweep.values[i]) << ',' << dirs[i] << ',' << r.exit_status << ','
            << num(metric("e0")) << ',' << num(metric("pohozaev_km")) << ',' << num(metric("pohozaev_pm")) << ','
            << num(metric("K_seed_minus_KQ")) << ',' << verdict << '\n';
        json metrics = json::object();
        for (const auto& [k, v] : r.metrics) metrics[k] = v;
        runs.push_back(json{{"value", cfg.sweep.values[i]},
                            {"directory", dirs[i]},
                            {"exit_status", r.exit_status},
                            {"error", r.error},
                            {"metrics", metrics}});
        for (const auto& f : r.files) ctx.add(dirs[i] + "/" + f.path);
        if (fs::exists(ctx.path(dirs[i] + "/manifest.json"))) ctx.add(dirs[i] + "/manifest.json");
        if (r.exit_status != kExitOk && worst == kExitOk) worst = r.exit_status;
    }
    ctx.write_text("sweep.csv", csv.str());
    ctx.write_json("sweep.json", json{{"axis", cfg.sweep.axis}, {"subcommand", cfg.sweep.subcommand}, {"runs", runs}});
    m.exit_status = worst;
    if (worst != kExitOk) m.error = "one or more sweep runs failed; see sweep.json";
}

void write_manifest(RunContext& ctx, RunManifest& m) {
    m.files.clear();
    std::vector<std::string> produced = ctx.produced();
    std::sort(produced.begin(), produced.end());
    for (const auto& rel : produced) {
        const fs::path p = ctx.path(rel);
        if (!fs::exists(p)) continue;
        m.files.push_back({rel, sha256_file(p.string()), fs::file_size(p)});
    }
    json files = json::array();
    for (const auto& f : m.files) files.push_back(json{{"path", f.path}, {"sha256", f.sha256}, {"bytes", f.bytes}});
    json verdicts = json::object();
    for (const auto& [k, v] : m.verdicts) verdicts[k] = v;
    json metrics = json::object();
    for (const auto& [k, v] : m.metrics) metrics[k] = v;
    json j{{"tool", "nls-lab"},
           {"version", m.version},
           {"subcommand", m.subcommand},
           {"started_utc", m.started_utc},
           {"wall_clock_seconds", m.wall_clock_seconds},
           {"config", m.config_text},
           {"files", files},
           {"verdicts", verdicts},
           {"metrics", metrics},
           {"exit_status", m.exit_status},
           {"error", m.error}};
    write_text_atomic(ctx.path("manifest.json"), j.dump(2) + "\n");
}

}  // namespace

std::string to_string(Subcommand s) {
    switch (s) {
        case Subcommand::ground: return "ground";
        case Subcommand::spectrum: return "spectrum";
        case Subcommand::special: return "special";
        case Subcommand::evolve: return "evolve";
        case Subcommand::virial: return "virial";
        case Subcommand::modulate: return "modulate";
        case Subcommand::sweep: return "sweep";
    }
    return "unknown";
}

Subcommand parse_subcommand(const std::string& name) {
    for (auto s : {Subcommand::ground, Subcommand::spectrum, Subcommand::special, Subcommand::evolve, Subcommand::virial,
                   Subcommand::modulate, Subcommand::sweep}) {
        if (to_string(s) == name) return s;
    }
    throw ConfigError("unknown subcommand '" + name + "'");
}

void write_timeseries_csv(const TrajectoryRecord& rec, const std::string& path) {
    std::ostringstream out;
    out << "t,mass,energy,kinetic,potential,delta,h1norm,alpha,theta0,theta1,alpha_plus,alpha_minus,verdict_flag\n";
    for (size_t i = 0; i < rec.samples.size(); ++i) {
        const TrajectorySample& s = rec.samples[i];
        const int flag = i + 1 == rec.samples.size() ? verdict_flag(rec.verdict) : 0;
        out << num(s.t) << ',' << num(s.mass) << ',' << num(s.energy) << ',' << num(s.kinetic) << ',' << num(s.potential)
            << ',' << num(s.delta) << ',' << num(s.h1norm) << ',' << num(s.alpha) << ',' << num(s.theta0) << ','
            << num(s.theta1) << ',' << num(s.alpha_plus) << ',' << num(s.alpha_minus) << ',' << flag << '\n';
    }
    write_text_atomic(path, out.str());
}

void write_summary_json(const SummaryFragment& summary, const std::string& path) {
    json fits = json::array();
    for (const auto& f : summary.fits) fits.push_back(fit_json(f));
    json j{{"beta", summary.beta},
           {"branch", to_string(summary.branch)},
           {"e0", std::isfinite(summary.e0) ? json(summary.e0) : json(nullptr)},
           {"verdicts", summary.verdicts},
           {"fits", fits}};
    write_text_atomic(path, j.dump(2) + "\n");
}

std::string sha256_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw NumericError("cannot open '" + path + "' for hashing");
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw NumericError("SHA-256 initialisation failed");
    std::vector<char> buf(1 << 16);
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<size_t>(in.gcount()));
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), digest, &len);
    std::ostringstream hex;
    for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
    return hex.str();
}

std::vector<std::string> verify_manifest(const std::string& manifest_path) {
    std::vector<std::string> problems;
    std::ifstream in(manifest_path);
    if (!in) return {"cannot open manifest '" + manifest_path + "'"};
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        return {std::string("manifest is not valid JSON: ") + e.what()};
    }
    const fs::path base = fs::path(manifest_path).parent_path();
    for (const auto& f : j.at("files")) {
        const std::string rel = f.at("path").get<std::string>();
        const fs::path p = base / rel;
        if (!fs::exists(p)) {
            problems.push_back(rel + ": missing");
            continue;
        }
        if (sha256_file(p.string()) != f.at("sha256").get<std::string>()) problems.push_back(rel + ": hash mismatch");
    }
    return problems;
}

RunManifest run_experiment(const ExperimentConfig& cfg, Subcommand sub) {
    const auto start = std::chrono::steady_clock::now();
    RunManifest m;
    m.subcommand = to_string(sub);
    m.version = NLSLAB_VERSION;
    m.config_text = to_text(cfg);
    m.started_utc = utc_now();
    RunContext ctx{fs::path(cfg.output_dir)};
    try {
        cfg.validate();
        switch (sub) {
            case Subcommand::ground: run_ground(cfg, ctx, m); break;
            case Subcommand::spectrum: run_spectrum(cfg, ctx, m); break;
            case Subcommand::special: run_special(cfg, ctx, m); break;
            case Subcommand::evolve: run_evolve(cfg, ctx, m); break;
            case Subcommand::virial: run_virial(cfg, ctx, m); break;
            case Subcommand::modulate: run_modulate(cfg, ctx, m); break;
            case Subcommand::sweep: run_sweep(cfg, ctx, m); break;
        }
    } catch (const ConfigError& e) {
        m.exit_status = kExitConfig;
        m.error = e.what();
    } catch (const NumericError& e) {
        m.exit_status = kExitNumeric;
        m.error = e.what();
    } catch (const std::exception& e) {
        m.exit_status = kExitNumeric;
        m.error = std::string("unexpected failure: ") + e.what();
    }
    m.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_manifest(ctx, m);
    return m;
}

}  // namespace nlslab
