#include "nlslab/decay_fit.hpp"

#include "nlslab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace nlslab {

DecayFit fit_exponential_decay(const std::vector<double>& t, const std::vector<double>& y, double t_lo,
                               double t_hi, const std::string& quantity, int min_samples) {
    if (t.size() != y.size()) throw ConfigError("fit_exponential_decay: t and y differ in length");
    if (!(t_hi > t_lo)) throw ConfigError("fit_exponential_decay: empty window");
    std::vector<double> xs, ls;
    for (size_t i = 0; i < t.size(); ++i) {
        if (t[i] < t_lo || t[i] > t_hi) continue;
        if (!(y[i] > 0.0) || !std::isfinite(y[i])) {
            std::ostringstream msg;
            msg << "fit_exponential_decay(" << quantity << "): non-positive or non-finite value " << y[i]
                << " at t = " << t[i];
            throw NumericError(msg.str());
        }
        xs.push_back(t[i]);
        ls.push_back(std::log(y[i]));
    }
    const int n = static_cast<int>(xs.size());
    if (n < min_samples) {
        std::ostringstream msg;
        msg << "fit_exponential_decay(" << quantity << "): " << n << " usable samples in [" << t_lo << ", " << t_hi
            << "], need " << min_samples;
        throw NumericError(msg.str());
    }
    double mx = 0.0, ml = 0.0;
    for (int i = 0; i < n; ++i) {
        mx += xs[i];
        ml += ls[i];
    }
    mx /= n;
    ml /= n;
    double sxx = 0.0, sxl = 0.0;
    for (int i = 0; i < n; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxl += (xs[i] - mx) * (ls[i] - ml);
    }
    if (!(sxx > 0.0)) throw NumericError("fit_exponential_decay: window holds a single time");
    const double slope = sxl / sxx;
    const double intercept = ml - slope * mx;
    DecayFit fit;
    fit.quantity = quantity;
    fit.t_lo = t_lo;
    fit.t_hi = t_hi;
    fit.rate = -slope;
    fit.amplitude = std::exp(intercept);
    fit.samples = n;
    for (int i = 0; i < n; ++i) fit.residual = std::max(fit.residual, std::abs(ls[i] - (intercept + slope * xs[i])));
    return fit;
}

}  // namespace nlslab
