#include "nlslab/sine_transform.hpp"

#include "nlslab/errors.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <mutex>

namespace nlslab {

namespace {
// The FFTW planner is not re-entrant; execution on distinct plans is.
std::mutex& planner_mutex() {
    static std::mutex mu;
    return mu;
}
}  // namespace

struct SineTransform::Impl {
    int n = 0;
    double scale = 0.0;
    double* buffer = nullptr;
    fftw_plan plan_pair = nullptr;  // two interleaved sequences (re, im)
    fftw_plan plan_single = nullptr;

    explicit Impl(int size) : n(size) {
        scale = 1.0 / std::sqrt(2.0 * (n + 1));
        buffer = static_cast<double*>(fftw_malloc(sizeof(double) * 2 * static_cast<size_t>(n)));
        if (!buffer) throw NumericError("sine transform: allocation failed");
        std::lock_guard<std::mutex> lock(planner_mutex());
        const fftw_r2r_kind kind = FFTW_RODFT00;
        const int len = n;
        // FFTW_ESTIMATE keeps plan selection deterministic across runs.
        plan_pair = fftw_plan_many_r2r(1, &len, 2, buffer, nullptr, 2, 1, buffer, nullptr, 2, 1,
                                       &kind, FFTW_ESTIMATE);
        plan_single = fftw_plan_r2r_1d(n, buffer, buffer, FFTW_RODFT00, FFTW_ESTIMATE);
        if (!plan_pair || !plan_single) throw NumericError("sine transform: planning failed");
    }

    ~Impl() {
        std::lock_guard<std::mutex> lock(planner_mutex());
        if (plan_pair) fftw_destroy_plan(plan_pair);
        if (plan_single) fftw_destroy_plan(plan_single);
        if (buffer) fftw_free(buffer);
    }
};

SineTransform::SineTransform(int n) : impl_(std::make_unique<Impl>(n)) {}
SineTransform::~SineTransform() = default;
SineTransform::SineTransform(SineTransform&&) noexcept = default;
SineTransform& SineTransform::operator=(SineTransform&&) noexcept = default;

int SineTransform::size() const noexcept { return impl_->n; }

void SineTransform::apply(CVec& data) {
    if (data.size() != impl_->n) throw NumericError("sine transform: size mismatch");
    const size_t bytes = sizeof(double) * 2 * static_cast<size_t>(impl_->n);
    std::memcpy(impl_->buffer, data.data(), bytes);
    fftw_execute(impl_->plan_pair);
    std::memcpy(static_cast<void*>(data.data()), impl_->buffer, bytes);
    data *= impl_->scale;
}

void SineTransform::apply_unnormalized(CVec& data) {
    if (data.size() != impl_->n) throw NumericError("sine transform: size mismatch");
    const size_t bytes = sizeof(double) * 2 * static_cast<size_t>(impl_->n);
    std::memcpy(impl_->buffer, data.data(), bytes);
    fftw_execute(impl_->plan_pair);
    std::memcpy(static_cast<void*>(data.data()), impl_->buffer, bytes);
}

double SineTransform::normalization() const noexcept { return 2.0 * (impl_->n + 1); }

void SineTransform::apply(RVec& data) {
    if (data.size() != impl_->n) throw NumericError("sine transform: size mismatch");
    const size_t bytes = sizeof(double) * static_cast<size_t>(impl_->n);
    std::memcpy(impl_->buffer, data.data(), bytes);
    fftw_execute(impl_->plan_single);
    std::memcpy(static_cast<void*>(data.data()), impl_->buffer, bytes);
    data *= impl_->scale;
}

}  // namespace nlslab
