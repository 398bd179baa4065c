// Experiment configuration: a key-value text format with sections.
//
//   # comment                  (also ';')
//   beta = 3                   top-level keys before any section
//   [grid]
//   n_points = 4096
//   r_max = 30
//   [evolution]
//   t_span = 0, 5              lists are comma separated
//
// Numbers are decimal or scientific; booleans are true/false/yes/no/on/off/1/0.
// Unknown sections or keys, malformed values and inconsistent combinations
// raise ConfigError with a "config:LINE:" prefix.
#pragma once

#include "nlslab/evolution.hpp"
#include "nlslab/ground_state.hpp"
#include "nlslab/virial.hpp"

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace nlslab {

enum class InitialKind { ground, scaled_ground, gaussian, special, state };
std::string to_string(InitialKind k);

enum class T0Mode { automatic, fixed };

struct ExperimentConfig {
    double beta = 3.0;
    Branch branch = Branch::symmetric;
    long seed = 1;
    std::string output_dir = "nls_out";

    struct Grid {
        int n_points = 4096;
        double r_max = 30.0;
    } grid;

    struct Evolution {
        double dt = 1e-3;
        std::optional<std::pair<double, double>> t_span;  // absolute times
        double duration = 1.0;                            // used when t_span is absent
        int direction = 1;                                // +1 forward, -1 backward
        int sample_every = 10;
        int snapshot_every = 0;                           // in samples; 0 disables snapshots
        bool detectors = true;
        Integrator integrator = Integrator::kl6;
        InitialKind initial = InitialKind::ground;
        double initial_scale = 1.0;
        double gaussian_amplitude = 0.5;
        double gaussian_width = 1.0;
        std::string state_file;
        double blowup_K_factor = 5.0;
        double tail_fraction_tol = 1e-6;
        double scatter_P_factor = 0.01;
        double scatter_window = 1.0;
        double converge_delta_factor = 0.1;
        double energy_drift_tol = 1e-8;
    } evolution;

    struct Special {
        double A = -1.0;
        int l = 4;
        T0Mode t0_mode = T0Mode::automatic;
        double t0 = std::nan("");
        double t0_fraction = 0.005;
    } special;

    struct Diagnostics {
        double delta0 = 0.1;  // as a multiple of K(Q)
        double virial_R = 8.0;
        WeightMode virial_weight = WeightMode::capped;
        std::optional<std::pair<double, double>> fit_window;  // absent: automatic
        bool modulation = true;
        bool projections = false;
        std::string input_dir;
    } diagnostics;

    struct Sweep {
        std::string axis = "beta";  // beta | A | l | resolution
        std::vector<double> values;
        std::string subcommand = "spectrum";
        int workers = 4;
    } sweep;

    // Cross-field checks; throws ConfigError.
    void validate() const;
    EvolutionConfig evolution_config() const;  // t_start / t_end left at defaults
};

// Parses and validates; missing keys keep their defaults.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);

// Applies "section.key=value" (or "key=value" for top-level keys). Cross-field
// consistency is left to a later validate(), so overrides may be applied in any order.
void apply_override(ExperimentConfig& cfg, const std::string& assignment);

// Canonical text listing every key; parse_config(to_text(c)) reproduces c.
std::string to_text(const ExperimentConfig& cfg);

}  // namespace nlslab
