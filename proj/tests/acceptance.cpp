// Acceptance suite: one PASS/FAIL line per criterion with the measured values.
//
// Runs the library and the experiment runner on the default grid (4096
// points, r_max = 30). Runner artifacts and a copy of the PASS/FAIL lines
// (acceptance_report.txt) go to ./acceptance_runs. Three
// criteria contain a requirement that the numerics cannot meet as stated;
// they are evaluated as written, print FAIL, and are listed in kExpectedRed.
// The process exits 0 when every FAIL line belongs to that list.
#include "nlslab/config.hpp"
#include "nlslab/decay_fit.hpp"
#include "nlslab/errors.hpp"
#include "nlslab/evolution.hpp"
#include "nlslab/ground_state.hpp"
#include "nlslab/linearized.hpp"
#include "nlslab/runner.hpp"
#include "nlslab/special_solutions.hpp"
#include "nlslab/virial.hpp"

#include "json.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace nlslab;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kN = 4096;
constexpr double kRmax = 30.0;

const std::set<std::string> kExpectedRed = {"linear-operator-identities", "conservation", "virial-identities"};

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [violated: " << what << "]";
        }
    }
};

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", x);
    return buf;
}

double l2(const StatePair& s) { return std::sqrt(mass(s)); }

double max_abs(const StatePair& s) { return std::max(s.u.cwiseAbs().maxCoeff(), s.v.cwiseAbs().maxCoeff()); }

json read_json(const fs::path& p) {
    std::ifstream in(p);
    return json::parse(in);
}

// Columns of a header-led CSV file; empty cells become NaN.
std::map<std::string, std::vector<double>> read_csv(const fs::path& p) {
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    std::vector<std::string> names;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) names.push_back(cell);
    }
    std::map<std::string, std::vector<double>> cols;
    while (std::getline(in, line)) {
        std::stringstream ss(line);
        std::string cell;
        for (const auto& name : names) {
            if (!std::getline(ss, cell, ',')) cell.clear();
            char* end = nullptr;
            const double v = cell.empty() ? kNaN : std::strtod(cell.c_str(), &end);
            cols[name].push_back(end != nullptr && *end != '\0' ? kNaN : v);
        }
    }
    return cols;
}

const json* find_fit(const json& summary, const std::string& quantity) {
    for (const auto& f : summary.at("fits")) {
        if (f.at("quantity") == quantity) return &f;
    }
    return nullptr;
}

StatePair smooth_pair(const GridPtr& g, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> c(0.0, 6.0), w(0.7, 2.5), a(-1.0, 1.0);
    CVec u = CVec::Zero(g->size()), v = CVec::Zero(g->size());
    for (int k = 0; k < 3; ++k) {
        u += cplx(a(rng), a(rng)) * (-((g->r().array() - c(rng)) / w(rng)).square()).exp().matrix().cast<cplx>();
        v += cplx(a(rng), a(rng)) * (-((g->r().array() - c(rng)) / w(rng)).square()).exp().matrix().cast<cplx>();
    }
    u(g->size() - 1) = 0.0;
    v(g->size() - 1) = 0.0;
    return StatePair(g, u, v);
}

struct Case {
    double beta;
    Branch branch;
    std::string label;
};

const std::vector<Case> kBuildable = {{0.5, Branch::semi_trivial_first, "0.5-first"},
                                      {0.5, Branch::semi_trivial_second, "0.5-second"},
                                      {2.0, Branch::symmetric, "2"},
                                      {3.0, Branch::symmetric, "3"},
                                      {5.0, Branch::symmetric, "5"}};

// Shared state: the default grid, the beta = 3 ground state and its spectrum,
// and the runner output directories.
struct Shared {
    GridPtr grid = make_grid(kN, kRmax);
    GroundStatePtr gs = build_ground_state(3.0, Branch::symmetric, grid);
    SectorPtr op0 = std::make_shared<const SectorOperator>(assemble_sector(gs, 0));
    SpectralPtr sd = std::make_shared<const SpectralData>(compute_spectrum(*op0));
    fs::path root = fs::current_path() / "acceptance_runs";
};

ExperimentConfig runner_config(const Shared& sh, const std::string& name) {
    ExperimentConfig c;
    c.grid.n_points = kN;
    c.grid.r_max = kRmax;
    c.output_dir = (sh.root / name).string();
    return c;
}

// Forward run of the special solution with amplitude A: snapshots at every
// sample (dt_sample = 0.01), projections and modulation on.
RunManifest special_forward(const Shared& sh, double A, const std::string& name) {
    ExperimentConfig c = runner_config(sh, name);
    c.special.A = A;
    c.evolution.initial = InitialKind::special;
    c.evolution.duration = 2.5;
    c.evolution.snapshot_every = 1;
    c.diagnostics.projections = true;
    return run_experiment(c, Subcommand::evolve);
}

RunManifest diagnose(const Shared& sh, Subcommand sub, const std::string& input, const std::string& name,
                     WeightMode weight = WeightMode::capped) {
    ExperimentConfig c = runner_config(sh, name);
    c.diagnostics.input_dir = (sh.root / input).string();
    c.diagnostics.virial_weight = weight;
    return run_experiment(c, sub);
}

// ------------------------------------------------------------------ criteria

void pohozaev(const Shared& sh, Outcome& o) {
    double worst_km = 0.0, worst_pm = 0.0, worst_time = 0.0;
    for (const Case& c : kBuildable) {
        const Stopwatch sw;
        const GroundStatePtr gs = build_ground_state(c.beta, c.branch, sh.grid);
        const auto [km, pm] = pohozaev_residuals(*gs);
        const double secs = sw.seconds();
        o.detail << " " << c.label << ":(" << fmt(km) << "," << fmt(pm) << "," << fmt(secs) << "s)";
        worst_km = std::max(worst_km, km);
        worst_pm = std::max(worst_pm, pm);
        worst_time = std::max(worst_time, secs);
    }
    o.require(worst_km <= 1e-6, "|K-3M|/K <= 1e-6");
    o.require(worst_pm <= 1e-6, "|P-4M|/P <= 1e-6");
    o.require(worst_time < 10.0, "runtime < 10 s per branch");
}

void sharp_constant(const Shared& sh, Outcome& o) {
    double gap = 0.0, equality = 0.0;
    for (const Case& c : kBuildable) {
        const GroundStatePtr gs = build_ground_state(c.beta, c.branch, sh.grid);
        const GnConstants g = gn_constant_forms(*gs);
        gap = std::max(gap, g.relative_gap);
        const double rhs = g.from_mk * std::sqrt(gs->M) * std::pow(gs->K, 1.5);
        equality = std::max(equality, std::abs(gs->P - rhs) / gs->P);
    }
    o.detail << " max form gap " << fmt(gap) << ", max |P - c M^1/2 K^3/2|/P " << fmt(equality) << " over "
             << kBuildable.size() << " ground states";
    o.require(gap <= 1e-8, "forms agree within 1e-8");
    o.require(equality <= 1e-6, "GN equality within 1e-6");
}

void spectrum(const Shared& sh, Outcome& o) {
    const std::vector<Case> cases = {{0.5, Branch::semi_trivial_first, "0.5"},
                                     {2.0, Branch::symmetric, "2"},
                                     {3.0, Branch::symmetric, "3"},
                                     {5.0, Branch::symmetric, "5"}};
    double lo = INFINITY, hi = -INFINITY, worst_res = 0.0, worst_phi = 0.0;
    bool dims_ok = true;
    for (const Case& c : cases) {
        const GroundStatePtr gs = build_ground_state(c.beta, c.branch, sh.grid);
        const SectorOperator op0 = assemble_sector(gs, 0);
        const SpectralData sd = compute_spectrum(op0);
        lo = std::min(lo, sd.e0);
        hi = std::max(hi, sd.e0);
        worst_res = std::max(worst_res, sd.eigen_residual);
        worst_phi = std::max({worst_phi, std::abs(sd.phi_plus) / mass(sd.Yplus), std::abs(sd.phi_minus) / mass(sd.Yminus)});
        const KernelReport k0 = kernel_basis(op0);
        const KernelReport k1 = kernel_basis(assemble_sector(gs, 1));
        const int want_LI = c.beta < 1.0 ? 1 : 2;
        const bool ok = k0.dim_LI == want_LI && k0.dim_LR == 0 && k1.dim_LR == 1 && k1.dim_LI == 0;
        dims_ok = dims_ok && ok;
        o.detail << " beta=" << c.label << ":e0=" << std::setprecision(12) << sd.e0 << std::setprecision(6)
                 << ",ker(l0 LI,LR; l1 LR)=(" << k0.dim_LI << "," << k0.dim_LR << ";" << k1.dim_LR << ")";
    }
    const double c1 = coercivity_estimate(*sh.op0, *sh.sd);
    const GridPtr fine = make_grid(2 * kN, kRmax);
    const SectorOperator opf = assemble_sector(build_ground_state(3.0, Branch::symmetric, fine), 0);
    const double c2 = coercivity_estimate(opf, compute_spectrum(opf));
    const double drift = std::abs(c2 - c1) / c1;
    o.detail << "; max eigen-residual " << fmt(worst_res) << ", e0 spread " << fmt(hi - lo) << ", max |Phi(Y)|/||Y||^2 "
             << fmt(worst_phi) << ", coercivity c " << fmt(c1) << " (N) / " << fmt(c2) << " (2N)";
    o.require(lo > 0.0, "e0 > 0");
    o.require(worst_res <= 1e-6, "eigen-residual <= 1e-6");
    o.require(hi - lo <= 1e-5, "e0 beta-independent within 1e-5");
    o.require(worst_phi <= 1e-6, "Phi(Y+-) = 0 within 1e-6 ||Y||^2");
    o.require(dims_ok, "kernel dimensions per regime");
    o.require(c1 > 0.0 && c2 > 0.0 && drift <= 0.1, "coercivity positive and stable within 10%");
}

void operator_identities(const Shared& sh, Outcome& o) {
    const GroundState& gs = *sh.gs;
    const double li = max_abs(apply_LI(*sh.op0, gs.Q)) / max_abs(gs.Q);
    const StatePair lam(gs.grid, scaling_generator(gs.Q.first()).values, scaling_generator(gs.Q.second()).values);
    const double lr = max_abs(apply_LR(*sh.op0, lam) + 2.0 * gs.Q) / max_abs(gs.Q);
    const double phi_q = quadratic_Phi(*sh.op0, gs.Q);
    const double literal = std::abs(phi_q + 2.0 * gs.P) / (2.0 * gs.P);
    const double derived = std::abs(phi_q + gs.P) / gs.P;
    std::mt19937_64 rng(7);
    double anti = 0.0;
    for (int k = 0; k < 50; ++k) {
        StatePair a = smooth_pair(gs.grid, rng), b = smooth_pair(gs.grid, rng);
        a *= 1.0 / h1_norm(a);
        b *= 1.0 / h1_norm(b);
        anti = std::max(anti, std::abs(bilinear_B(*sh.op0, apply_script_L(*sh.op0, a), b) +
                                       bilinear_B(*sh.op0, a, apply_script_L(*sh.op0, b))));
    }
    o.detail << " |L_I Q|/|Q| " << fmt(li) << ", |L_R Lambda Q + 2Q|/|Q| " << fmt(lr) << ", B(Lw,z)+B(w,Lz) "
             << fmt(anti) << " (50 unit pairs), Phi(Q)/P(Q) " << std::setprecision(10) << phi_q / gs.P
             << std::setprecision(6) << " -> |Phi(Q)+2P|/2P " << fmt(literal) << " (Phi(Q) = -P holds to "
             << fmt(derived) << ")";
    o.require(li <= 1e-6, "L_I Q = 0");
    o.require(lr <= 1e-6, "L_R Lambda Q = -2Q");
    o.require(anti <= 1e-6, "B-antisymmetry");
    o.require(literal <= 1e-6, "Phi(Q) = -2P(Q)");
}

void residual_decay(const Shared& sh, Outcome& o) {
    const Stopwatch sw;
    const FrequencySeries s = build_Z_sequence(sh.op0, sh.sd, 1.0, 4);
    const double e0 = s.e0;
    // Start where the series is small (||V|| = 0.05 ||Q||) and keep the samples
    // at least three decades above the roundoff floor of eps_l (~1e-12 ||Q||_H1).
    const double t0 = auto_t0(s, 0.05);
    const double floor = 1e-9 * h1_norm(sh.gs->Q);
    bool ok = true;
    for (int l = 1; l <= 4; ++l) {
        std::vector<double> t, y;
        const double span = 5.0 / e0;
        for (int k = 0; k <= 100; ++k) {
            const double tk = t0 + span * k / 100.0;
            const double v = h1_norm(residual_epsilon(s, tk, l));
            if (v <= floor) break;
            t.push_back(tk);
            y.push_back(v);
        }
        const DecayFit f = fit_exponential_decay(t, y, t.front(), t.back(), "eps");
        const double rel = std::abs(f.rate / ((l + 1) * e0) - 1.0);
        o.detail << " l=" << l << ":rate " << fmt(f.rate) << " vs " << fmt((l + 1) * e0) << " (" << fmt(100 * rel)
                 << "%, window " << fmt((f.t_hi - f.t_lo) * e0) << "/e0)";
        ok = ok && rel <= 0.05;
    }
    const double secs = sw.seconds();
    o.detail << "; " << fmt(secs) << " s";
    o.require(ok, "rates within 5% of (l+1) e0");
    o.require(secs < 60.0, "runtime < 1 min");
}

void special_dynamics(const Shared& sh, Outcome& o) {
    const Stopwatch sw;
    const double e0 = sh.sd->e0;
    const RunManifest fwd = special_forward(sh, -1.0, "special_minus_forward");
    const json summary = read_json(sh.root / "special_minus_forward" / "summary.json");
    const json* fd = find_fit(summary, "delta");
    double rate = kNaN, window = 0.0;
    if (fd) {
        rate = fd->at("rate").get<double>();
        window = (fd->at("window")[1].get<double>() - fd->at("window")[0].get<double>()) * e0;
    }

    ExperimentConfig back = runner_config(sh, "special_minus_backward");
    back.special.A = -1.0;
    back.evolution.initial = InitialKind::special;
    back.evolution.direction = -1;
    back.evolution.duration = 8.0;
    const RunManifest mb = run_experiment(back, Subcommand::evolve);

    ExperimentConfig up = back;
    up.output_dir = (sh.root / "special_plus_backward").string();
    up.special.A = 1.0;
    const RunManifest pb = run_experiment(up, Subcommand::evolve);
    const double secs = sw.seconds();

    const std::string vf = fwd.verdicts.count("evolve") ? fwd.verdicts.at("evolve") : fwd.error;
    const std::string vb = mb.verdicts.count("evolve") ? mb.verdicts.at("evolve") : mb.error;
    const std::string vp = pb.verdicts.count("evolve") ? pb.verdicts.at("evolve") : pb.error;
    const double rel = std::abs(rate / e0 - 1.0);
    o.detail << " A=-1 forward: " << vf << ", delta rate " << fmt(rate) << " vs e0 " << fmt(e0) << " (" << fmt(100 * rel)
             << "%) over " << fmt(window) << "/e0; A=-1 backward: " << vb << "; A=+1 backward: " << vp << "; "
             << fmt(secs) << " s";
    o.require(fd != nullptr && rel <= 0.05, "delta decay rate within 5% of e0");
    o.require(window >= 3.0, "fit window >= 3/e0");
    o.require(vb == "scatter", "backward A=-1 scatters");
    o.require(vp == "blowup", "backward A=+1 blows up");
    o.require(secs < 1800.0, "runtime < 30 min");
}

void conservation(const Shared& sh, Outcome& o) {
    const GroundState& gs = *sh.gs;
    EvolutionConfig c;
    c.beta = gs.beta;
    c.t_start = 0.0;
    c.t_end = 5.0;
    c.dt = 1e-3;
    double worst = 0.0, at1 = 0.0;
    const TrajectoryRecord r = evolve(gs.Q, c, gs.reference(), [&](const StatePair& s, TrajectorySample& x) {
        const double d = h1_norm(s - std::polar(1.0, x.t) * gs.Q);
        worst = std::max(worst, d);
        if (x.t <= 1.0 + 1e-9) at1 = std::max(at1, d);
    });
    o.detail << " mass drift " << fmt(r.max_mass_drift_rate) << "/unit, energy drift " << fmt(r.max_energy_drift_rate)
             << "/unit, max ||s - e^{it}Q||_H1 " << fmt(worst) << " on [0,5] (" << fmt(at1)
             << " on [0,1]; growth follows e^{e0 t} from roundoff), verdict " << to_string(r.verdict);
    o.require(r.max_mass_drift_rate <= 1e-12, "mass drift <= 1e-12");
    o.require(r.max_energy_drift_rate <= 1e-8, "energy drift <= 1e-8");
    o.require(worst <= 1e-6, "H1 deviation <= 1e-6 on [0,5]");
}

void virial_identities(const Shared& sh, Outcome& o) {
    const double h2 = sh.grid->h() * sh.grid->h();
    // High regime, exact variance: the A = +1 solution stays above K(Q).
    special_forward(sh, 1.0, "special_plus_forward");
    diagnose(sh, Subcommand::virial, "special_plus_forward", "virial_exact_plus", WeightMode::exact_quadratic);
    const json vx = read_json(sh.root / "virial_exact_plus" / "virial.json");
    const auto cols = read_csv(sh.root / "virial_exact_plus" / "virial.csv");
    double high = 0.0;
    int high_n = 0;
    for (size_t i = 0; i < cols.at("t").size(); ++i) {
        const double fd = cols.at("Vsecond_fd")[i], d = cols.at("delta")[i];
        if (!std::isfinite(fd) || !(d > 0.0)) continue;
        high = std::max(high, std::abs(fd + 4.0 * d) / (4.0 * d));
        ++high_n;
    }
    const VirialWeight w(WeightMode::capped, 8.0);
    const double ar_q = std::abs(virial_AR(sh.gs->Q, w, sh.gs->beta));

    // Low regime, capped weight, along the A = -1 run written by special_dynamics.
    diagnose(sh, Subcommand::virial, "special_minus_forward", "virial_capped_minus");
    const json vl = read_json(sh.root / "virial_capped_minus" / "virial.json");
    const double derived = vl.at("max_relative_mismatch").get<double>();
    const double printed = vl.at("max_relative_mismatch_printed_low").get<double>();
    o.detail << " exact weight, A=+1: max |V''_fd + 4 delta|/4 delta " << fmt(high) << " over " << high_n
             << " samples; |A_R(Q)| " << fmt(ar_q) << " vs 5h^2 " << fmt(5 * h2) << "; capped weight, A=-1: "
             << "printed V'' = 2 delta + A_R mismatch " << fmt(printed) << ", derived 4 delta + A_R mismatch "
             << fmt(derived) << " (" << vl.at("snapshots") << " snapshots)";
    o.require(high_n > 0 && high <= 0.01, "V'' = -4 delta within 1%");
    o.require(ar_q <= 5.0 * h2, "A_R(Q) <= 5 h^2");
    o.require(printed <= 0.01, "low-regime V'' = 2 delta + A_R within 1%");
    (void)vx;
}

void banica(const Shared& sh, Outcome& o) {
    const double C = 1.0;
    const VirialWeight w(WeightMode::capped, 8.0);
    // Trajectory samples: the capped-weight virial run on the A = -1 snapshots.
    const json vl = read_json(sh.root / "virial_capped_minus" / "virial.json");
    const double traj = vl.at("banica").at("max_ratio").get<double>();
    const int samples = vl.at("banica").at("samples").get<int>();
    double fam = 0.0;
    int fam_n = 0;
    for (int k = 0; k <= 20; ++k) {
        const double eps = std::pow(10.0, -3.0 + 2.0 * k / 20.0);
        for (bool upper : {true, false}) {
            const BanicaGap g = banica_gap(threshold_phase_family(*sh.gs, w, eps, upper), w, *sh.gs);
            fam = std::max(fam, g.ratio);
            ++fam_n;
        }
    }
    o.detail << " C = " << C << " (weight gradient constant " << fmt(w.gradient_constant(*sh.grid))
             << "); max lhs/rhs " << fmt(traj) << " over " << samples << " Q- trajectory states, " << fmt(fam)
             << " over " << fam_n << " e^{i eps a}Q states";
    o.require(samples >= 100, "at least 100 trajectory states");
    o.require(traj <= C && fam <= C, "lhs <= C rhs");
}

void modulation(const Shared& sh, Outcome& o) {
    // Calibrate on the A = +1 run, check the A = -1 run.
    diagnose(sh, Subcommand::modulate, "special_plus_forward", "modulation_plus");
    diagnose(sh, Subcommand::modulate, "special_minus_forward", "modulation_minus");
    const json cal = read_json(sh.root / "modulation_plus" / "modulation.json");
    const json chk = read_json(sh.root / "modulation_minus" / "modulation.json");
    const double a_lo = cal.at("band_alpha_over_delta")[0].get<double>() / 2.0;
    const double a_hi = cal.at("band_alpha_over_delta")[1].get<double>() * 2.0;
    const double r_lo = cal.at("band_remainder_over_delta")[0].get<double>() / 2.0;
    const double r_hi = cal.at("band_remainder_over_delta")[1].get<double>() * 2.0;
    const auto cols = read_csv(sh.root / "modulation_minus" / "modulation.csv");
    int inside = 0, n = 0;
    for (size_t i = 0; i < cols.at("t").size(); ++i) {
        const double a = cols.at("alpha_over_delta")[i], r = cols.at("remainder_over_delta")[i];
        ++n;
        if (a >= a_lo && a <= a_hi && r >= r_lo && r <= r_hi) ++inside;
    }
    const double orth = std::max(cal.at("max_orthogonality_residual").get<double>(),
                                 chk.at("max_orthogonality_residual").get<double>());
    o.detail << " band from A=+1 (" << cal.at("samples") << " samples): |alpha|/delta in [" << fmt(a_lo) << ","
             << fmt(a_hi) << "], ||(h,k)||/delta in [" << fmt(r_lo) << "," << fmt(r_hi) << "]; A=-1: " << inside << "/"
             << n << " samples inside (observed [" << fmt(chk.at("band_alpha_over_delta")[0].get<double>()) << ","
             << fmt(chk.at("band_alpha_over_delta")[1].get<double>()) << "], ["
             << fmt(chk.at("band_remainder_over_delta")[0].get<double>()) << ","
             << fmt(chk.at("band_remainder_over_delta")[1].get<double>()) << "]); max orthogonality residual "
             << fmt(orth);
    o.require(n > 0 && inside == n, "all samples inside the calibrated band");
    o.require(orth <= 1e-10, "orthogonality residual <= 1e-10");
}

void projections(const Shared& sh, Outcome& o) {
    const double e0 = sh.sd->e0;
    const json summary = read_json(sh.root / "special_minus_forward" / "summary.json");
    const auto cols = read_csv(sh.root / "special_minus_forward" / "trajectory.csv");
    const json* fp = find_fit(summary, "alpha_plus");
    const json* fm = find_fit(summary, "alpha_minus");
    const json* fb = find_fit(summary, "beta_sum");
    if (!fp || !fm || !fb) {
        o.require(false, "projection fits present");
        return;
    }
    const double lo = fp->at("window")[0].get<double>(), hi = fp->at("window")[1].get<double>();
    double amin = INFINITY, amax = -INFINITY, sum = 0.0;
    int n = 0;
    for (size_t i = 0; i < cols.at("t").size(); ++i) {
        const double t = cols.at("t")[i], a = cols.at("alpha_plus")[i];
        if (t < lo || t > hi || !std::isfinite(a)) continue;
        const double A = std::exp(e0 * t) * a;
        amin = std::min(amin, A);
        amax = std::max(amax, A);
        sum += A;
        ++n;
    }
    const double mean = sum / n;
    const double spread = (amax - amin) / std::abs(mean);
    const double rp = fp->at("rate").get<double>(), rm = fm->at("rate").get<double>(), rb = fb->at("rate").get<double>();
    o.detail << " e^{e0 t} alpha_+ over [" << fmt(lo) << "," << fmt(hi) << "] (" << n << " samples): mean "
             << fmt(mean) << ", spread " << fmt(100 * spread) << "%; decay rates alpha_+ " << fmt(rp) << ", |alpha_-| "
             << fmt(rm) << ", sum|beta_j| " << fmt(rb);
    o.require(n >= 10 && spread <= 0.03, "fitted A constant within 3%");
    o.require(rm >= rp && rb >= rp, "alpha_- and beta decay no slower than alpha_+");
}

}  // namespace

int main() {
    const Stopwatch total;
    Shared sh;
    fs::create_directories(sh.root);

    const std::vector<std::pair<std::string, std::function<void(const Shared&, Outcome&)>>> criteria = {
        {"pohozaev-identities", pohozaev},
        {"sharp-constant", sharp_constant},
        {"spectrum", spectrum},
        {"linear-operator-identities", operator_identities},
        {"residual-decay-law", residual_decay},
        {"special-solution-dynamics", special_dynamics},
        {"conservation", conservation},
        {"virial-identities", virial_identities},
        {"banica-inequality", banica},
        {"modulation", modulation},
        {"spectral-projections", projections},
    };

    std::ofstream report(sh.root / "acceptance_report.txt");
    int unexpected = 0;
    for (const auto& [name, fn] : criteria) {
        Outcome o;
        const Stopwatch sw;
        try {
            fn(sh, o);
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << " [exception: " << e.what() << "]";
        }
        const std::string line =
            (o.pass ? "PASS " : "FAIL ") + name + ":" + o.detail.str() + " (" + fmt(sw.seconds()) + " s)";
        std::cout << line << std::endl;
        report << line << '\n';
        if (!o.pass && !kExpectedRed.count(name)) ++unexpected;
    }
    std::ostringstream tail;
    tail << "acceptance finished in " << fmt(total.seconds()) << " s; " << unexpected
         << " unexpected failure(s); expected failures: linear-operator-identities (Phi(Q) = -2P), "
            "conservation (H1 gate on [0,5]), virial-identities (printed low-regime 2 delta)";
    std::cout << tail.str() << std::endl;
    report << tail.str() << '\n';
    return unexpected == 0 ? 0 : 1;
}
