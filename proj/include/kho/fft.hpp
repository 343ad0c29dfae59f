#pragma once

#include <fftw3.h>

#include <cmath>
#include <vector>

#include "kho/common.hpp"

namespace kho {

// Thin RAII pair of in-place 1D FFTW plans. FFTW_ESTIMATE keeps plan choice
// deterministic; FFTW_UNALIGNED lets the same plan run on any buffer, which
// makes executes thread-safe on per-thread scratch. Transforms are
// unnormalized in both directions.
class Fft1d {
public:
    explicit Fft1d(int n) : n_(n) {
        std::vector<cd> tmp(static_cast<std::size_t>(n));
        auto* p = reinterpret_cast<fftw_complex*>(tmp.data());
        fwd_ = fftw_plan_dft_1d(n, p, p, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
        bwd_ = fftw_plan_dft_1d(n, p, p, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
        if (!fwd_ || !bwd_) throw Error("fftw plan creation failed");
    }
    ~Fft1d() {
        if (fwd_) fftw_destroy_plan(fwd_);
        if (bwd_) fftw_destroy_plan(bwd_);
    }
    Fft1d(const Fft1d&) = delete;
    Fft1d& operator=(const Fft1d&) = delete;

    int size() const { return n_; }
    void forward(cd* x) const {
        auto* p = reinterpret_cast<fftw_complex*>(x);
        fftw_execute_dft(fwd_, p, p);
    }
    void backward(cd* x) const {  // unnormalized: caller divides by n
        auto* p = reinterpret_cast<fftw_complex*>(x);
        fftw_execute_dft(bwd_, p, p);
    }

private:
    int n_;
    fftw_plan fwd_ = nullptr, bwd_ = nullptr;
};

inline int next_pow2(int n) {
    int p = 1;
    while (p < n) p <<= 1;
    return p;
}

// Chirp-z transform y_k = sum_m x_m e^{+2 pi i d k m / n}, k = 0..n-1, via
// Bluestein's identity km = (k^2 + m^2 - (k-m)^2)/2 and one circular
// convolution of length >= 2n-1. Chirp angles grow like pi d n, so the m^2
// products are taken in long double before reduction.
class Czt {
public:
    Czt(int n, double d)
        : n_(n), pad_(next_pow2(2 * n - 1)), fft_pad_(pad_), chirp_(std::size_t(n)),
          bhat_(std::size_t(pad_), cd(0, 0)) {
        const long double f = std::numbers::pi_v<long double> * (long double)d / (long double)n;
        for (int m = 0; m < n; ++m) {
            const long double ang = f * (long double)m * (long double)m;
            chirp_[m] = cd(double(std::cos(ang)), double(std::sin(ang)));
        }
        bhat_[0] = std::conj(chirp_[0]);
        for (int t = 1; t < n; ++t) {
            bhat_[t] = std::conj(chirp_[t]);
            bhat_[pad_ - t] = std::conj(chirp_[t]);
        }
        fft_pad_.forward(bhat_.data());
    }

    int pad() const { return pad_; }

    // In-place on x (length n); scratch must hold pad() entries.
    void apply(cd* x, cd* scratch) const {
        for (int m = 0; m < n_; ++m) scratch[m] = x[m] * chirp_[m];
        for (int m = n_; m < pad_; ++m) scratch[m] = cd(0, 0);
        fft_pad_.forward(scratch);
        for (int t = 0; t < pad_; ++t) scratch[t] *= bhat_[t];
        fft_pad_.backward(scratch);
        const double inv = 1.0 / pad_;
        for (int k = 0; k < n_; ++k) x[k] = scratch[k] * chirp_[k] * inv;
    }

private:
    int n_, pad_;
    Fft1d fft_pad_;
    std::vector<cd> chirp_;
    std::vector<cd> bhat_;
};

}  // namespace kho
