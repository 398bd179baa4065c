// Orchestration of the experiment suite: each subcommand reads an
// ExperimentConfig, writes its artifacts into cfg.output_dir and finishes by
// writing manifest.json (config snapshot, file hashes, verdicts, metrics).
//
// Artifacts per subcommand:
//   ground    ground.json, summary.json
//   spectrum  spectrum.json, summary.json
//   special   seed.state, special.json, summary.json
//   evolve    trajectory.csv, summary.json, evolve.json, final.state,
//             snapshots/state_NNNNNN.state (when evolution.snapshot_every > 0)
//   virial    virial.csv, virial.json, summary.json      (reads diagnostics.input_dir)
//   modulate  modulation.csv, modulation.json, summary.json
//   sweep     sweep.csv, sweep.json, one sub-directory per value
#pragma once

#include "nlslab/config.hpp"
#include "nlslab/decay_fit.hpp"
#include "nlslab/evolution.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace nlslab {

enum class Subcommand { ground, spectrum, special, evolve, virial, modulate, sweep };
std::string to_string(Subcommand s);
Subcommand parse_subcommand(const std::string& name);  // throws ConfigError

// Exit codes shared with the CLI.
constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitUndetermined = 4;

struct FileRecord {
    std::string path;  // relative to the output directory, '/' separated
    std::string sha256;
    std::uintmax_t bytes = 0;
};

struct RunManifest {
    std::string subcommand;
    std::string version;
    std::string config_text;
    std::string started_utc;
    double wall_clock_seconds = 0.0;
    std::vector<FileRecord> files;
    std::map<std::string, std::string> verdicts;
    std::map<std::string, double> metrics;
    int exit_status = kExitOk;
    std::string error;
};

// Schema of summary.json: {beta, branch, e0, verdicts, fits}.
struct SummaryFragment {
    double beta = 0.0;
    Branch branch = Branch::symmetric;
    double e0 = kNaN;  // written as null when unknown
    std::vector<std::string> verdicts;
    std::vector<DecayFit> fits;
};

// Header: t,mass,energy,kinetic,potential,delta,h1norm,alpha,theta0,theta1,
// alpha_plus,alpha_minus,verdict_flag. Numbers use the shortest round-trip
// form; quantities that were not computed are left empty. verdict_flag is 0
// on every row but the last, which carries the run's verdict.
void write_timeseries_csv(const TrajectoryRecord& rec, const std::string& path);
void write_summary_json(const SummaryFragment& summary, const std::string& path);

std::string sha256_file(const std::string& path);

// Problems found when re-hashing the files listed in a manifest (empty: consistent).
std::vector<std::string> verify_manifest(const std::string& manifest_path);

// Never throws for module errors: they are recorded in the manifest with the
// matching exit status. Filesystem failures on the output directory propagate.
RunManifest run_experiment(const ExperimentConfig& cfg, Subcommand sub);

}  // namespace nlslab
