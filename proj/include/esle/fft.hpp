#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <vector>

#include "esle/errors.hpp"

namespace esle::fft {

using cplx = std::complex<double>;

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

// Reusable transform plan. Power-of-two lengths run the iterative radix-2
// path; any other length falls back to Bluestein's chirp-z, built on an
// internal power-of-two plan.
class Plan {
  public:
    explicit Plan(std::size_t n) : n_(n) {
        if (n_ == 0) throw ConfigError("fft::Plan: zero length");
        if (is_pow2(n_)) {
            init_pow2(n_);
        } else {
            init_bluestein();
        }
    }

    std::size_t size() const { return n_; }

    void forward(std::vector<cplx>& a) const { transform(a, false); }
    void inverse(std::vector<cplx>& a) const { transform(a, true); }

  private:
    std::size_t n_ = 0;
    // radix-2 state
    std::vector<std::size_t> bitrev_;
    std::vector<cplx> roots_; // e^{-2 pi i k / n}, k = 0 .. n/2-1
    // bluestein state
    std::unique_ptr<Plan> inner_;
    std::vector<cplx> chirp_;     // e^{-i pi j^2 / n}
    std::vector<cplx> chirp_fft_; // forward transform of the chirp filter

    void init_pow2(std::size_t n) {
        bitrev_.resize(n);
        std::size_t log2n = 0;
        while ((std::size_t(1) << log2n) < n) ++log2n;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t r = 0;
            for (std::size_t b = 0; b < log2n; ++b)
                if (i & (std::size_t(1) << b)) r |= std::size_t(1) << (log2n - 1 - b);
            bitrev_[i] = r;
        }
        roots_.resize(n / 2);
        for (std::size_t k = 0; k < n / 2; ++k) {
            double ang = -2.0 * M_PI * static_cast<double>(k) / static_cast<double>(n);
            roots_[k] = cplx(std::cos(ang), std::sin(ang));
        }
    }

    void init_bluestein() {
        chirp_.resize(n_);
        for (std::size_t j = 0; j < n_; ++j) {
            // j^2 mod 2n keeps the argument small
            std::size_t j2 = (j * j) % (2 * n_);
            double ang = -M_PI * static_cast<double>(j2) / static_cast<double>(n_);
            chirp_[j] = cplx(std::cos(ang), std::sin(ang));
        }
        std::size_t m = next_pow2(2 * n_ - 1);
        inner_ = std::make_unique<Plan>(m);
        chirp_fft_.assign(m, cplx(0.0, 0.0));
        chirp_fft_[0] = std::conj(chirp_[0]);
        for (std::size_t j = 1; j < n_; ++j) {
            chirp_fft_[j] = std::conj(chirp_[j]);
            chirp_fft_[m - j] = std::conj(chirp_[j]);
        }
        inner_->forward(chirp_fft_);
    }

    void pow2_transform(std::vector<cplx>& a, bool inv) const {
        const std::size_t n = n_;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t j = bitrev_[i];
            if (i < j) std::swap(a[i], a[j]);
        }
        for (std::size_t len = 2; len <= n; len <<= 1) {
            const std::size_t half = len >> 1;
            const std::size_t step = n / len;
            for (std::size_t i = 0; i < n; i += len) {
                for (std::size_t k = 0; k < half; ++k) {
                    cplx w = roots_[k * step];
                    if (inv) w = std::conj(w);
                    cplx u = a[i + k];
                    cplx v = a[i + k + half] * w;
                    a[i + k] = u + v;
                    a[i + k + half] = u - v;
                }
            }
        }
        if (inv) {
            const double s = 1.0 / static_cast<double>(n);
            for (auto& z : a) z *= s;
        }
    }

    void bluestein_forward(std::vector<cplx>& a) const {
        const std::size_t m = inner_->size();
        std::vector<cplx> b(m, cplx(0.0, 0.0));
        for (std::size_t j = 0; j < n_; ++j) b[j] = a[j] * chirp_[j];
        inner_->forward(b);
        for (std::size_t j = 0; j < m; ++j) b[j] *= chirp_fft_[j];
        inner_->inverse(b);
        for (std::size_t j = 0; j < n_; ++j) a[j] = b[j] * chirp_[j];
    }

    void transform(std::vector<cplx>& a, bool inv) const {
        if (a.size() != n_) throw ConfigError("fft::Plan: length mismatch");
        if (inner_ == nullptr) {
            pow2_transform(a, inv);
            return;
        }
        if (inv) {
            // inverse as the conjugated forward transform
            for (auto& z : a) z = std::conj(z);
            bluestein_forward(a);
            const double s = 1.0 / static_cast<double>(n_);
            for (auto& z : a) z = std::conj(z) * s;
        } else {
            bluestein_forward(a);
        }
    }
};

} // namespace esle::fft
