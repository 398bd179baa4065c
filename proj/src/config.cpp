#include "nlslab/config.hpp"

#include "nlslab/errors.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

namespace nlslab {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_double(const std::string& text) {
    const std::string t = trim(text);
    double value = 0.0;
    const char* begin = t.data();
    const char* end = begin + t.size();
    // from_chars rejects a leading '+'; accept it for convenience.
    if (begin != end && *begin == '+') ++begin;
    const auto res = std::from_chars(begin, end, value);
    if (t.empty() || res.ec != std::errc() || res.ptr != end || !std::isfinite(value)) {
        throw ConfigError("malformed number '" + t + "'");
    }
    return value;
}

long parse_long(const std::string& text) {
    const std::string t = trim(text);
    long value = 0;
    const char* begin = t.data();
    const char* end = begin + t.size();
    if (begin != end && *begin == '+') ++begin;
    const auto res = std::from_chars(begin, end, value);
    if (t.empty() || res.ec != std::errc() || res.ptr != end) throw ConfigError("malformed integer '" + t + "'");
    return value;
}

int parse_int(const std::string& text) {
    const long v = parse_long(text);
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
        throw ConfigError("integer out of range '" + trim(text) + "'");
    }
    return static_cast<int>(v);
}

bool parse_bool(const std::string& text) {
    std::string t = trim(text);
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
    if (t == "true" || t == "yes" || t == "on" || t == "1") return true;
    if (t == "false" || t == "no" || t == "off" || t == "0") return false;
    throw ConfigError("malformed boolean '" + trim(text) + "'");
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_double(item));
    return out;
}

std::pair<double, double> parse_pair(const std::string& text) {
    const auto v = parse_list(text);
    if (v.size() != 2) throw ConfigError("expected two comma-separated numbers, got '" + trim(text) + "'");
    return {v[0], v[1]};
}

// Shortest round-trip representation, independent of the locale.
std::string fmt(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

InitialKind parse_initial(const std::string& s) {
    if (s == "ground") return InitialKind::ground;
    if (s == "scaled_ground") return InitialKind::scaled_ground;
    if (s == "gaussian") return InitialKind::gaussian;
    if (s == "special") return InitialKind::special;
    if (s == "state") return InitialKind::state;
    throw ConfigError("unknown initial data '" + s + "' (expected ground, scaled_ground, gaussian, special, state)");
}

struct KeySpec {
    std::function<void(ExperimentConfig&, const std::string&)> set;
    std::function<std::string(const ExperimentConfig&)> get;
};

// Ordered table of every key; also drives to_text().
const std::vector<std::pair<std::string, KeySpec>>& key_table() {
    using C = ExperimentConfig;
    static const std::vector<std::pair<std::string, KeySpec>> table = {
        {"beta", {[](C& c, const std::string& v) { c.beta = parse_double(v); }, [](const C& c) { return fmt(c.beta); }}},
        {"branch", {[](C& c, const std::string& v) { c.branch = parse_branch(trim(v)); },
                    [](const C& c) { return to_string(c.branch); }}},
        {"seed", {[](C& c, const std::string& v) { c.seed = parse_long(v); }, [](const C& c) { return std::to_string(c.seed); }}},
        {"output_dir", {[](C& c, const std::string& v) { c.output_dir = trim(v); }, [](const C& c) { return c.output_dir; }}},

        {"grid.n_points", {[](C& c, const std::string& v) { c.grid.n_points = parse_int(v); },
                           [](const C& c) { return std::to_string(c.grid.n_points); }}},
        {"grid.r_max", {[](C& c, const std::string& v) { c.grid.r_max = parse_double(v); },
                        [](const C& c) { return fmt(c.grid.r_max); }}},

        {"evolution.dt", {[](C& c, const std::string& v) { c.evolution.dt = parse_double(v); },
                          [](const C& c) { return fmt(c.evolution.dt); }}},
        {"evolution.t_span",
         {[](C& c, const std::string& v) {
              if (trim(v) == "auto") c.evolution.t_span.reset();
              else c.evolution.t_span = parse_pair(v);
          },
          [](const C& c) {
              return c.evolution.t_span ? fmt(c.evolution.t_span->first) + ", " + fmt(c.evolution.t_span->second)
                                        : std::string("auto");
          }}},
        {"evolution.duration", {[](C& c, const std::string& v) { c.evolution.duration = parse_double(v); },
                                [](const C& c) { return fmt(c.evolution.duration); }}},
        {"evolution.direction",
         {[](C& c, const std::string& v) {
              const std::string t = trim(v);
              if (t == "forward") c.evolution.direction = 1;
              else if (t == "backward") c.evolution.direction = -1;
              else throw ConfigError("direction must be 'forward' or 'backward', got '" + t + "'");
          },
          [](const C& c) { return std::string(c.evolution.direction > 0 ? "forward" : "backward"); }}},
        {"evolution.sample_every", {[](C& c, const std::string& v) { c.evolution.sample_every = parse_int(v); },
                                    [](const C& c) { return std::to_string(c.evolution.sample_every); }}},
        {"evolution.snapshot_every", {[](C& c, const std::string& v) { c.evolution.snapshot_every = parse_int(v); },
                                      [](const C& c) { return std::to_string(c.evolution.snapshot_every); }}},
        {"evolution.detectors", {[](C& c, const std::string& v) { c.evolution.detectors = parse_bool(v); },
                                 [](const C& c) { return std::string(c.evolution.detectors ? "true" : "false"); }}},
        {"evolution.integrator", {[](C& c, const std::string& v) { c.evolution.integrator = parse_integrator(trim(v)); },
                                  [](const C& c) { return to_string(c.evolution.integrator); }}},
        {"evolution.initial", {[](C& c, const std::string& v) { c.evolution.initial = parse_initial(trim(v)); },
                               [](const C& c) { return to_string(c.evolution.initial); }}},
        {"evolution.initial_scale", {[](C& c, const std::string& v) { c.evolution.initial_scale = parse_double(v); },
                                     [](const C& c) { return fmt(c.evolution.initial_scale); }}},
        {"evolution.gaussian_amplitude",
         {[](C& c, const std::string& v) { c.evolution.gaussian_amplitude = parse_double(v); },
          [](const C& c) { return fmt(c.evolution.gaussian_amplitude); }}},
        {"evolution.gaussian_width", {[](C& c, const std::string& v) { c.evolution.gaussian_width = parse_double(v); },
                                      [](const C& c) { return fmt(c.evolution.gaussian_width); }}},
        {"evolution.state_file", {[](C& c, const std::string& v) { c.evolution.state_file = trim(v); },
                                  [](const C& c) { return c.evolution.state_file; }}},
        {"evolution.blowup_K_factor", {[](C& c, const std::string& v) { c.evolution.blowup_K_factor = parse_double(v); },
                                       [](const C& c) { return fmt(c.evolution.blowup_K_factor); }}},
        {"evolution.tail_fraction_tol",
         {[](C& c, const std::string& v) { c.evolution.tail_fraction_tol = parse_double(v); },
          [](const C& c) { return fmt(c.evolution.tail_fraction_tol); }}},
        {"evolution.scatter_P_factor",
         {[](C& c, const std::string& v) { c.evolution.scatter_P_factor = parse_double(v); },
          [](const C& c) { return fmt(c.evolution.scatter_P_factor); }}},
        {"evolution.scatter_window", {[](C& c, const std::string& v) { c.evolution.scatter_window = parse_double(v); },
                                      [](const C& c) { return fmt(c.evolution.scatter_window); }}},
        {"evolution.converge_delta_factor",
         {[](C& c, const std::string& v) { c.evolution.converge_delta_factor = parse_double(v); },
          [](const C& c) { return fmt(c.evolution.converge_delta_factor); }}},
        {"evolution.energy_drift_tol",
         {[](C& c, const std::string& v) { c.evolution.energy_drift_tol = parse_double(v); },
          [](const C& c) { return fmt(c.evolution.energy_drift_tol); }}},

        {"special.A", {[](C& c, const std::string& v) { c.special.A = parse_double(v); },
                       [](const C& c) { return fmt(c.special.A); }}},
        {"special.l", {[](C& c, const std::string& v) { c.special.l = parse_int(v); },
                       [](const C& c) { return std::to_string(c.special.l); }}},
        {"special.t0_mode",
         {[](C& c, const std::string& v) {
              const std::string t = trim(v);
              if (t == "auto") c.special.t0_mode = T0Mode::automatic;
              else if (t == "fixed") c.special.t0_mode = T0Mode::fixed;
              else throw ConfigError("t0_mode must be 'auto' or 'fixed', got '" + t + "'");
          },
          [](const C& c) { return std::string(c.special.t0_mode == T0Mode::automatic ? "auto" : "fixed"); }}},
        {"special.t0",
         {[](C& c, const std::string& v) { c.special.t0 = parse_double(v); },
          [](const C& c) { return std::isfinite(c.special.t0) ? fmt(c.special.t0) : std::string("unset"); }}},
        {"special.t0_fraction", {[](C& c, const std::string& v) { c.special.t0_fraction = parse_double(v); },
                                 [](const C& c) { return fmt(c.special.t0_fraction); }}},

        {"diagnostics.delta0", {[](C& c, const std::string& v) { c.diagnostics.delta0 = parse_double(v); },
                                [](const C& c) { return fmt(c.diagnostics.delta0); }}},
        {"diagnostics.virial_R", {[](C& c, const std::string& v) { c.diagnostics.virial_R = parse_double(v); },
                                  [](const C& c) { return fmt(c.diagnostics.virial_R); }}},
        {"diagnostics.virial_weight",
         {[](C& c, const std::string& v) { c.diagnostics.virial_weight = parse_weight_mode(trim(v)); },
          [](const C& c) { return to_string(c.diagnostics.virial_weight); }}},
        {"diagnostics.fit_window",
         {[](C& c, const std::string& v) {
              if (trim(v) == "auto") c.diagnostics.fit_window.reset();
              else c.diagnostics.fit_window = parse_pair(v);
          },
          [](const C& c) {
              return c.diagnostics.fit_window
                         ? fmt(c.diagnostics.fit_window->first) + ", " + fmt(c.diagnostics.fit_window->second)
                         : std::string("auto");
          }}},
        {"diagnostics.modulation", {[](C& c, const std::string& v) { c.diagnostics.modulation = parse_bool(v); },
                                    [](const C& c) { return std::string(c.diagnostics.modulation ? "true" : "false"); }}},
        {"diagnostics.projections", {[](C& c, const std::string& v) { c.diagnostics.projections = parse_bool(v); },
                                     [](const C& c) { return std::string(c.diagnostics.projections ? "true" : "false"); }}},
        {"diagnostics.input_dir", {[](C& c, const std::string& v) { c.diagnostics.input_dir = trim(v); },
                                   [](const C& c) { return c.diagnostics.input_dir; }}},

        {"sweep.axis", {[](C& c, const std::string& v) { c.sweep.axis = trim(v); }, [](const C& c) { return c.sweep.axis; }}},
        {"sweep.values",
         {[](C& c, const std::string& v) { c.sweep.values = trim(v).empty() ? std::vector<double>{} : parse_list(v); },
          [](const C& c) {
              std::string out;
              for (size_t i = 0; i < c.sweep.values.size(); ++i) out += (i ? ", " : "") + fmt(c.sweep.values[i]);
              return out;
          }}},
        {"sweep.subcommand", {[](C& c, const std::string& v) { c.sweep.subcommand = trim(v); },
                              [](const C& c) { return c.sweep.subcommand; }}},
        {"sweep.workers", {[](C& c, const std::string& v) { c.sweep.workers = parse_int(v); },
                           [](const C& c) { return std::to_string(c.sweep.workers); }}},
    };
    return table;
}

const KeySpec* find_key(const std::string& full) {
    for (const auto& [name, spec] : key_table()) {
        if (name == full) return &spec;
    }
    return nullptr;
}

bool known_section(const std::string& s) {
    return s == "grid" || s == "evolution" || s == "special" || s == "diagnostics" || s == "sweep";
}

std::string anchored(int line, const std::string& msg) { return "config:" + std::to_string(line) + ": " + msg; }

}  // namespace

std::string to_string(InitialKind k) {
    switch (k) {
        case InitialKind::ground: return "ground";
        case InitialKind::scaled_ground: return "scaled_ground";
        case InitialKind::gaussian: return "gaussian";
        case InitialKind::special: return "special";
        case InitialKind::state: return "state";
    }
    return "unknown";
}

void ExperimentConfig::validate() const {
    validate_branch(beta, branch);
    if (grid.n_points < 16) throw ConfigError("grid.n_points must be at least 16");
    if (!(grid.r_max > 0.0)) throw ConfigError("grid.r_max must be positive");
    if (!(evolution.duration > 0.0)) throw ConfigError("evolution.duration must be positive");
    if (evolution.t_span && evolution.t_span->first == evolution.t_span->second)
        throw ConfigError("evolution.t_span must have distinct end points");
    if (evolution.snapshot_every < 0) throw ConfigError("evolution.snapshot_every must be non-negative");
    if (!(evolution.initial_scale > 0.0)) throw ConfigError("evolution.initial_scale must be positive");
    if (!(evolution.gaussian_width > 0.0)) throw ConfigError("evolution.gaussian_width must be positive");
    if (evolution.initial == InitialKind::state && evolution.state_file.empty())
        throw ConfigError("evolution.initial = state requires evolution.state_file");
    if (!(evolution.converge_delta_factor > 0.0)) throw ConfigError("evolution.converge_delta_factor must be positive");
    if (!(evolution.energy_drift_tol > 0.0)) throw ConfigError("evolution.energy_drift_tol must be positive");
    evolution_config().validate();
    if (special.l < 1) throw ConfigError("special.l must be at least 1");
    if (special.t0_mode == T0Mode::fixed && !std::isfinite(special.t0))
        throw ConfigError("special.t0_mode = fixed requires special.t0");
    if (!(special.t0_fraction > 0.0 && special.t0_fraction <= 0.1))
        throw ConfigError("special.t0_fraction must lie in (0, 0.1]");
    if (!(diagnostics.delta0 > 0.0 && diagnostics.delta0 < 1.0)) throw ConfigError("diagnostics.delta0 must lie in (0, 1)");
    if (!(diagnostics.virial_R > 0.0)) throw ConfigError("diagnostics.virial_R must be positive");
    if (diagnostics.fit_window && !(diagnostics.fit_window->second > diagnostics.fit_window->first))
        throw ConfigError("diagnostics.fit_window must be increasing");
    if (sweep.axis != "beta" && sweep.axis != "A" && sweep.axis != "l" && sweep.axis != "resolution")
        throw ConfigError("sweep.axis must be one of beta, A, l, resolution");
    static const char* kSubs[] = {"ground", "spectrum", "special", "evolve"};
    if (std::find(std::begin(kSubs), std::end(kSubs), sweep.subcommand) == std::end(kSubs))
        throw ConfigError("sweep.subcommand must be one of ground, spectrum, special, evolve");
    if (sweep.workers < 1) throw ConfigError("sweep.workers must be at least 1");
}

EvolutionConfig ExperimentConfig::evolution_config() const {
    EvolutionConfig e;
    e.dt = evolution.dt;
    e.sample_every = evolution.sample_every;
    e.blowup_K_factor = evolution.blowup_K_factor;
    e.tail_fraction_tol = evolution.tail_fraction_tol;
    e.scatter_P_factor = evolution.scatter_P_factor;
    e.scatter_window = evolution.scatter_window;
    e.converge_delta_factor = evolution.converge_delta_factor;
    e.energy_drift_tol = evolution.energy_drift_tol;
    e.beta = beta;
    e.integrator = evolution.integrator;
    e.detectors = evolution.detectors;
    return e;
}

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string raw, section;
    int line = 0, consistency_line = 0;
    std::map<std::string, int> seen;
    while (std::getline(in, raw)) {
        ++line;
        std::string s = raw;
        const auto hash = s.find_first_of("#;");
        if (hash != std::string::npos) s = s.substr(0, hash);
        s = trim(s);
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') throw ConfigError(anchored(line, "unterminated section header '" + s + "'"));
            section = trim(s.substr(1, s.size() - 2));
            if (!known_section(section)) throw ConfigError(anchored(line, "unknown section [" + section + "]"));
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError(anchored(line, "expected 'key = value', got '" + s + "'"));
        const std::string key = trim(s.substr(0, eq));
        const std::string value = trim(s.substr(eq + 1));
        const std::string full = section.empty() ? key : section + "." + key;
        const KeySpec* spec = find_key(full);
        if (!spec) {
            throw ConfigError(anchored(line, "unknown key '" + key + "'" +
                                                 (section.empty() ? std::string() : " in [" + section + "]")));
        }
        if (auto it = seen.find(full); it != seen.end()) {
            throw ConfigError(anchored(line, "duplicate key '" + full + "' (first set on line " +
                                                 std::to_string(it->second) + ")"));
        }
        seen[full] = line;
        try {
            spec->set(cfg, value);
        } catch (const ConfigError& e) {
            throw ConfigError(anchored(line, full + ": " + e.what()));
        }
        if (full == "beta" || full == "branch") consistency_line = std::max(consistency_line, line);
    }
    try {
        validate_branch(cfg.beta, cfg.branch);
    } catch (const ConfigError& e) {
        throw ConfigError(anchored(consistency_line, e.what()));
    }
    try {
        cfg.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(anchored(line, std::string("after parsing: ") + e.what()));
    }
    return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse_config(ss.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path + ":" + std::string(e.what()).substr(std::string("config:").size()));
    }
}

void apply_override(ExperimentConfig& cfg, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not of the form key=value");
    const std::string key = trim(assignment.substr(0, eq));
    const KeySpec* spec = find_key(key);
    if (!spec) throw ConfigError("override: unknown key '" + key + "'");
    try {
        spec->set(cfg, assignment.substr(eq + 1));
    } catch (const ConfigError& e) {
        throw ConfigError("override " + key + ": " + e.what());
    }
}

std::string to_text(const ExperimentConfig& cfg) {
    std::ostringstream out;
    std::string current;
    for (const auto& [name, spec] : key_table()) {
        const auto dot = name.find('.');
        const std::string section = dot == std::string::npos ? "" : name.substr(0, dot);
        const std::string key = dot == std::string::npos ? name : name.substr(dot + 1);
        const std::string value = spec.get(cfg);
        if (section != current) {
            out << "\n[" << section << "]\n";
            current = section;
        }
        // Unset optional values are omitted so the text parses back.
        if (value == "unset") continue;
        out << key << " = " << value << "\n";
    }
    return out.str();
}

}  // namespace nlslab
