// Thin RAII wrapper over FFTW for in-place complex transforms of fixed size.
#pragma once

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <mutex>
#include <new>
#include <span>

namespace polariton {

namespace detail {
// Planner calls are not thread-safe in FFTW; execution is.
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace detail

/// Aligned complex buffer with forward/backward in-place plans.
/// Plans use FFTW_ESTIMATE so the chosen algorithm (and therefore every
/// rounding) is the same on every run.
class FftBuffer {
public:
    explicit FftBuffer(std::size_t n) : n_(n) {
        data_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
        if (!data_) throw std::bad_alloc();
        std::lock_guard lock(detail::fftw_planner_mutex());
        const int ni = static_cast<int>(n);
        forward_ = fftw_plan_dft_1d(ni, data_, data_, FFTW_FORWARD, FFTW_ESTIMATE);
        backward_ = fftw_plan_dft_1d(ni, data_, data_, FFTW_BACKWARD, FFTW_ESTIMATE);
    }

    ~FftBuffer() {
        std::lock_guard lock(detail::fftw_planner_mutex());
        fftw_destroy_plan(forward_);
        fftw_destroy_plan(backward_);
        fftw_free(data_);
    }

    FftBuffer(const FftBuffer&) = delete;
    FftBuffer& operator=(const FftBuffer&) = delete;

    std::size_t size() const { return n_; }

    std::span<std::complex<double>> data() {
        return {reinterpret_cast<std::complex<double>*>(data_), n_};
    }

    /// Unnormalised forward transform.
    void forward() { fftw_execute(forward_); }
    /// Unnormalised backward transform (scale by 1/n yourself).
    void backward() { fftw_execute(backward_); }

private:
    std::size_t n_;
    fftw_complex* data_ = nullptr;
    fftw_plan forward_ = nullptr;
    fftw_plan backward_ = nullptr;
};

}  // namespace polariton
