// nls-lab: command-line front end of the experiment suite.
//
//   nls-lab <ground|spectrum|special|evolve|virial|modulate|sweep>
//           [--config FILE] [--set section.key=value ...] [--output-dir DIR]
//
// Exit status: 0 success, 2 configuration error, 3 numerical failure,
// 4 undetermined verdict.
#include "nlslab/config.hpp"
#include "nlslab/errors.hpp"
#include "nlslab/runner.hpp"

#include "CLI11.hpp"

#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

std::string fmt(double v) {
    std::ostringstream out;
    out.precision(17);
    out << v;
    return out.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Threshold dynamics of the coupled cubic NLS system in 3-D"};
    app.set_version_flag("--version", std::string(NLSLAB_VERSION));

    std::string subcommand;
    std::string config_path;
    std::vector<std::string> overrides;
    std::string output_dir;
    std::string input_dir;
    std::optional<double> beta, A, t0;
    std::optional<std::string> branch;
    std::optional<int> order;

    app.add_option("subcommand", subcommand, "ground | spectrum | special | evolve | virial | modulate | sweep")
        ->required()
        ->check(CLI::IsMember({"ground", "spectrum", "special", "evolve", "virial", "modulate", "sweep"}));
    app.add_option("--config", config_path, "experiment configuration file")->check(CLI::ExistingFile);
    app.add_option("--set", overrides, "override one key, e.g. --set grid.n_points=2048 (repeatable)");
    app.add_option("--output-dir", output_dir, "output directory (overrides OUTPUT_DIR and the config)");
    app.add_option("--input", input_dir, "evolve output directory read by virial / modulate");
    app.add_option("--beta", beta, "coupling constant");
    app.add_option("--branch", branch, "symmetric | semi_trivial_first | semi_trivial_second");
    app.add_option("--A", A, "amplitude of the unstable mode in the special solution");
    app.add_option("--l", order, "order of the exponential series");
    app.add_option("--t0", t0, "seed time of the special solution (default: automatic)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? nlslab::kExitOk : nlslab::kExitConfig;
    }

    nlslab::ExperimentConfig cfg;
    try {
        if (!config_path.empty()) cfg = nlslab::load_config_file(config_path);
        if (const char* env = std::getenv("OUTPUT_DIR"); env != nullptr && *env != '\0') cfg.output_dir = env;
        // Dedicated flags first, then --set in the order given.
        if (beta) nlslab::apply_override(cfg, "beta=" + fmt(*beta));
        if (branch) nlslab::apply_override(cfg, "branch=" + *branch);
        if (A) nlslab::apply_override(cfg, "special.A=" + fmt(*A));
        if (order) nlslab::apply_override(cfg, "special.l=" + std::to_string(*order));
        if (t0) {
            nlslab::apply_override(cfg, "special.t0_mode=fixed");
            nlslab::apply_override(cfg, "special.t0=" + fmt(*t0));
        }
        if (!input_dir.empty()) nlslab::apply_override(cfg, "diagnostics.input_dir=" + input_dir);
        for (const auto& o : overrides) nlslab::apply_override(cfg, o);
        if (!output_dir.empty()) cfg.output_dir = output_dir;
        cfg.validate();
    } catch (const nlslab::ConfigError& e) {
        std::cerr << "nls-lab: " << e.what() << '\n';
        return nlslab::kExitConfig;
    }

    try {
        const nlslab::RunManifest m = nlslab::run_experiment(cfg, nlslab::parse_subcommand(subcommand));
        if (!m.error.empty()) std::cerr << "nls-lab: " << m.error << '\n';
        for (const auto& [k, v] : m.verdicts) std::cout << k << ": " << v << '\n';
        std::cout << "wrote " << m.files.size() + 1 << " files to " << cfg.output_dir << " (" << m.wall_clock_seconds
                  << " s)\n";
        return m.exit_status;
    } catch (const std::exception& e) {
        std::cerr << "nls-lab: cannot write outputs: " << e.what() << '\n';
        return nlslab::kExitNumeric;
    }
}
