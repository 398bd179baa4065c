#include "nlslab/grid.hpp"

#include "nlslab/errors.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace nlslab {

RadialGrid::RadialGrid(int n_points, double r_max)
    : n_(n_points), r_max_(r_max), h_(r_max / n_points), r_(n_points), weights_(n_points) {
    const double four_pi_h = 4.0 * std::numbers::pi * h_;
    for (int i = 0; i < n_; ++i) {
        const double ri = (i + 1) * h_;
        r_[i] = ri;
        weights_[i] = four_pi_h * ri * ri;
    }
    // The r = 0 endpoint carries a zero integrand; only the outer endpoint
    // receives the half weight of the trapezoid rule.
    weights_[n_ - 1] *= 0.5;
}

double RadialGrid::w_measure() const noexcept { return 4.0 * std::numbers::pi * h_; }

GridPtr make_grid(int n_points, double r_max) {
    if (n_points < 16) {
        throw ConfigError("grid: n_points must be >= 16, got " + std::to_string(n_points));
    }
    if (!(r_max > 0.0) || !std::isfinite(r_max)) {
        throw ConfigError("grid: r_max must be positive and finite");
    }
    return std::make_shared<const RadialGrid>(n_points, r_max);
}

}  // namespace nlslab
