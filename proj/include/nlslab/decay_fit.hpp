// Least-squares exponential fits y ~ amplitude * exp(-rate t).
#pragma once

#include <string>
#include <vector>

namespace nlslab {

struct DecayFit {
    std::string quantity;
    double t_lo = 0.0, t_hi = 0.0;
    double rate = 0.0;
    double amplitude = 0.0;
    double residual = 0.0;  // max |log y - fitted log y| over the window
    int samples = 0;
};

// Fits log y against t over the samples with t in [t_lo, t_hi]. Throws
// NumericError when a value in the window is non-positive or non-finite, or
// when fewer than min_samples samples fall in the window.
DecayFit fit_exponential_decay(const std::vector<double>& t, const std::vector<double>& y, double t_lo,
                               double t_hi, const std::string& quantity = "", int min_samples = 10);

}  // namespace nlslab
