// Uniform radial mesh for radially symmetric fields on R^3.
//
// Nodes sit at r_i = i*h for i = 1..n (the origin is excluded). Fields are
// handled through the substitution w = r*u, which turns the 3-D radial
// Laplacian into a 1-D second derivative with w(0) = 0. The last node
// r_n = r_max is a Dirichlet wall: fields vanish there and the operators
// decouple it from the interior.
#pragma once

#include <Eigen/Dense>

#include <complex>
#include <memory>

namespace nlslab {

using cplx = std::complex<double>;
using RVec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;

class RadialGrid {
public:
    RadialGrid(int n_points, double r_max);

    int size() const noexcept { return n_; }
    double r_max() const noexcept { return r_max_; }
    double h() const noexcept { return h_; }

    // Node radii r_i = (i+1) h, zero-based.
    const RVec& r() const noexcept { return r_; }

    // Composite-trapezoid weights for 4*pi*int_0^{r_max} f(r) r^2 dr.
    const RVec& weights() const noexcept { return weights_; }

    // Integral over the ball of a sampled radial function.
    double integrate(const RVec& f) const { return weights_.dot(f); }

    // Uniform weight 4*pi*h used for inner products in the w = r*u
    // representation, under which the discrete operators are symmetric.
    double w_measure() const noexcept;

private:
    int n_;
    double r_max_;
    double h_;
    RVec r_;
    RVec weights_;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

// Validating factory: n_points >= 16 and r_max > 0.
GridPtr make_grid(int n_points, double r_max);

}  // namespace nlslab
