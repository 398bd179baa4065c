// Binary state files.
//
// Layout (little-endian, as written by x86-64 / aarch64 hosts):
//   offset  0  char[8]   magic "NLSSTATE"
//   offset  8  uint32    format version (1)
//   offset 12  uint32    n_points
//   offset 16  float64   r_max
//   offset 24  float64   beta
//   offset 32  float64   t
//   offset 40  float64   gauge_phase (phase of the standing-wave factor, informational)
//   offset 48  float64[2 n_points]   u as (re, im) pairs, node order r_1 .. r_n
//   then       float64[2 n_points]   v likewise
#pragma once

#include "nlslab/state.hpp"

#include <string>

namespace nlslab {

struct StateFile {
    StatePair state;
    double beta = 0.0;
    double t = 0.0;
    double gauge_phase = 0.0;
};

// Writes atomically (temporary file then rename); throws NumericError on I/O failure.
void write_state_file(const std::string& path, const StatePair& s, double beta, double t, double gauge_phase);

// Throws ConfigError for missing, truncated or malformed files.
StateFile read_state_file(const std::string& path);

}  // namespace nlslab
