// Error taxonomy shared by the library and the CLI exit-code mapping.
#pragma once

#include <stdexcept>
#include <string>

namespace nlslab {

// Invalid user input or inconsistent configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A numerical postcondition failed: solver breakdown, tolerance not met,
// resonance, non-finite values (CLI exit code 3).
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Emits a warning line on std::clog; thread-safe.
void log_warning(const std::string& message);

}  // namespace nlslab
