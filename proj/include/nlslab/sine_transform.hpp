// Orthonormal type-I discrete sine transform (FFTW RODFT00) applied to the
// real and imaginary parts of complex samples. The orthonormal DST-I is its
// own inverse.
//
// Each object owns its plan and work buffer, so one instance must not be used
// from two threads at once; separate instances are independent.
#pragma once

#include "nlslab/grid.hpp"

#include <memory>

namespace nlslab {

class SineTransform {
public:
    explicit SineTransform(int n);
    ~SineTransform();
    SineTransform(const SineTransform&) = delete;
    SineTransform& operator=(const SineTransform&) = delete;
    SineTransform(SineTransform&&) noexcept;
    SineTransform& operator=(SineTransform&&) noexcept;

    int size() const noexcept;

    // In-place orthonormal transform (forward == inverse).
    void apply(CVec& data);
    void apply(RVec& data);

    // Unscaled transform; applying it twice multiplies by normalization().
    // Folding 1/normalization() into other factors avoids the rounding of the
    // orthonormal scale, which otherwise biases long runs.
    void apply_unnormalized(CVec& data);
    double normalization() const noexcept;  // 2 (n + 1)

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace nlslab
