#include "nlslab/state_io.hpp"

#include "nlslab/errors.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>

namespace nlslab {

namespace {

static_assert(std::endian::native == std::endian::little, "state files are written little-endian");

constexpr char kMagic[8] = {'N', 'L', 'S', 'S', 'T', 'A', 'T', 'E'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ofstream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& in, const std::string& path) {
    T v{};
    if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) throw ConfigError("state file '" + path + "' is truncated");
    return v;
}

}  // namespace

void write_state_file(const std::string& path, const StatePair& s, double beta, double t, double gauge_phase) {
    check_state(s, "write_state_file");
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw NumericError("cannot open '" + tmp + "' for writing");
        out.write(kMagic, sizeof(kMagic));
        put(out, kVersion);
        put(out, static_cast<std::uint32_t>(s.size()));
        put(out, s.grid->r_max());
        put(out, beta);
        put(out, t);
        put(out, gauge_phase);
        const auto bytes = static_cast<std::streamsize>(sizeof(cplx) * s.size());
        out.write(reinterpret_cast<const char*>(s.u.data()), bytes);
        out.write(reinterpret_cast<const char*>(s.v.data()), bytes);
        if (!out) {
            out.close();
            std::filesystem::remove(tmp);
            throw NumericError("write to '" + tmp + "' failed");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw NumericError("cannot move state file into place: " + ec.message());
    }
}

StateFile read_state_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open state file '" + path + "'");
    char magic[8];
    if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw ConfigError("'" + path + "' is not a state file (bad magic)");
    }
    const auto version = get<std::uint32_t>(in, path);
    if (version != kVersion) throw ConfigError("state file '" + path + "' has unsupported version " + std::to_string(version));
    const auto n = get<std::uint32_t>(in, path);
    const double r_max = get<double>(in, path);
    StateFile f;
    f.beta = get<double>(in, path);
    f.t = get<double>(in, path);
    f.gauge_phase = get<double>(in, path);
    GridPtr grid = make_grid(static_cast<int>(n), r_max);
    CVec u(n), v(n);
    const auto bytes = static_cast<std::streamsize>(sizeof(cplx) * n);
    if (!in.read(reinterpret_cast<char*>(u.data()), bytes) || !in.read(reinterpret_cast<char*>(v.data()), bytes)) {
        throw ConfigError("state file '" + path + "' is truncated");
    }
    f.state = StatePair(grid, std::move(u), std::move(v));
    if (!f.state.all_finite()) throw ConfigError("state file '" + path + "' holds non-finite samples");
    return f;
}

}  // namespace nlslab
