#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <type_traits>
#include <vector>

#include "esle/bath.hpp"
#include "esle/fft.hpp"
#include "esle/kernels.hpp"

namespace esle {

struct SpectrumDiagnostics {
    double most_negative_bin = 0.0; // most negative DFT bin before clamping
    double max_bin = 0.0;
    std::size_t clamped_bins = 0;
    double residual = 0.0; // max |self-convolution - extended kernel samples|
};

struct FilterDiagnostics {
    SpectrumDiagnostics eta_eta;
    SpectrumDiagnostics mu_mu;
};

// Filtering kernels in the form used by the generator:
//   s_eta_eta, s_mu_mu : nonnegative square roots of the DFT of the
//                        (symmetrically extended) stationary kernels
//   g_eta_nu_spec      : -(i/2) DFT of the zero-padded causal K_eta_nu
//   g_eta_mu           : K_eta_mu / (2i), dense over (elapsed, tau)
// The companions G_nu_eta and G_mu_eta are discrete deltas and never stored.
// The eta-channel spectra live on a zero-padded circle of length pad_t
// (linear convolution); the mu-channel spectrum lives on the doubled
// imaginary-time circle of length 2M, where the kernel is genuinely periodic
// and needs no padding.
struct FilterSet {
    std::size_t n = 0;
    std::size_t m = 0;
    double dt = 0.0;
    double dtau = 0.0;
    std::size_t pad_t = 0;
    std::size_t circle_tau = 0;
    std::vector<double> s_eta_eta;
    std::vector<double> s_mu_mu;
    std::vector<cplx> g_eta_nu_spec;
    std::vector<cplx> g_eta_mu;
    std::size_t cross_rows = 0;
    // decoupled bath: every channel, including the delta companions, is zero
    bool zero_coupling = false;
    FilterDiagnostics diag;
    std::shared_ptr<const fft::Plan> plan_t;
    std::shared_ptr<const fft::Plan> plan_tau;

    cplx g_eta_mu_at(std::size_t i, std::size_t j) const {
        return i < cross_rows ? g_eta_mu[i * (m + 1) + j] : cplx(0.0, 0.0);
    }
};

namespace detail {

// Factorize a real even periodic sequence: DFT, clamp negative bins to zero,
// return elementwise nonnegative square roots. The relative clamp threshold
// guards against kernels that are badly non-PSD at this resolution.
inline std::vector<double> factor_spectrum(const std::vector<cplx>& extended,
                                           const fft::Plan& plan,
                                           SpectrumDiagnostics& diag,
                                           double clamp_threshold = 1e-6) {
    std::vector<cplx> bins = extended;
    plan.forward(bins);
    const std::size_t p = bins.size();
    std::vector<double> s(p, 0.0);
    diag.most_negative_bin = 0.0;
    diag.max_bin = 0.0;
    diag.clamped_bins = 0;
    for (std::size_t k = 0; k < p; ++k) {
        const double re = bins[k].real();
        diag.max_bin = std::max(diag.max_bin, re);
        if (re < diag.most_negative_bin) diag.most_negative_bin = re;
        if (re < 0.0) ++diag.clamped_bins;
        s[k] = re > 0.0 ? std::sqrt(re) : 0.0;
    }
    if (diag.max_bin > 0.0 && diag.most_negative_bin < -clamp_threshold * diag.max_bin)
        throw FactorizationError(
            "spectral factorization: kernel is not approximately positive semidefinite "
            "on this grid (most negative bin " + std::to_string(diag.most_negative_bin) +
            " vs max " + std::to_string(diag.max_bin) + ")");
    // residual of the round trip: inverse DFT of S^2 against the input
    std::vector<cplx> back(p);
    for (std::size_t k = 0; k < p; ++k) back[k] = cplx(s[k] * s[k], 0.0);
    plan.inverse(back);
    diag.residual = 0.0;
    for (std::size_t k = 0; k < p; ++k)
        diag.residual = std::max(diag.residual, std::abs(back[k] - extended[k]));
    return s;
}

} // namespace detail

inline std::vector<double> build_g_eta_eta(const KernelTable& kernel, const fft::Plan& plan,
                                           SpectrumDiagnostics& diag) {
    const std::size_t p = plan.size();
    std::vector<cplx> ext(p, cplx(0.0, 0.0));
    ext[0] = kernel.eta_eta[0];
    for (std::size_t k = 1; k <= kernel.n; ++k) {
        ext[k] = kernel.eta_eta[k];
        ext[p - k] = kernel.eta_eta[k];
    }
    return detail::factor_spectrum(ext, plan, diag);
}

inline std::vector<double> build_g_mu_mu(const KernelTable& kernel, const fft::Plan& plan,
                                         SpectrumDiagnostics& diag) {
    const std::size_t c = plan.size(); // 2M
    std::vector<cplx> ext(c, cplx(0.0, 0.0));
    for (std::size_t j = 0; j < c; ++j) {
        long lag = static_cast<long>(j);
        if (lag > static_cast<long>(kernel.m)) lag -= static_cast<long>(c);
        ext[j] = kernel.mu_mu_at(lag);
    }
    return detail::factor_spectrum(ext, plan, diag);
}

inline std::vector<cplx> build_g_eta_nu(const KernelTable& kernel, const fft::Plan& plan) {
    const std::size_t p = plan.size();
    std::vector<cplx> spec(p, cplx(0.0, 0.0));
    for (std::size_t k = 1; k <= kernel.n; ++k) spec[k] = kernel.eta_nu[k];
    plan.forward(spec);
    const cplx half_over_i(0.0, -0.5);
    for (auto& z : spec) z *= half_over_i;
    return spec;
}

inline std::vector<cplx> build_g_eta_mu(const KernelTable& kernel) {
    std::vector<cplx> g(kernel.eta_mu.size());
    const cplx half_over_i(0.0, -0.5);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = half_over_i * kernel.eta_mu[i];
    return g;
}

inline FilterSet build_filters(const KernelTable& kernel, const TimeGrids& grids) {
    FilterSet f;
    f.n = kernel.n;
    f.m = kernel.m;
    f.dt = grids.dt;
    f.dtau = grids.dtau;
    f.pad_t = fft::next_pow2(2 * (kernel.n + 1));
    f.circle_tau = 2 * kernel.m;
    f.plan_t = std::make_shared<const fft::Plan>(f.pad_t);
    f.plan_tau = std::make_shared<const fft::Plan>(f.circle_tau);
    f.s_eta_eta = build_g_eta_eta(kernel, *f.plan_t, f.diag.eta_eta);
    f.s_mu_mu = build_g_mu_mu(kernel, *f.plan_tau, f.diag.mu_mu);
    f.g_eta_nu_spec = build_g_eta_nu(kernel, *f.plan_t);
    f.g_eta_mu = build_g_eta_mu(kernel);
    f.cross_rows = kernel.cross_rows;
    auto all_zero = [](const auto& v) {
        for (const auto& x : v)
            if (x != typename std::decay_t<decltype(v)>::value_type{}) return false;
        return true;
    };
    f.zero_coupling = all_zero(kernel.eta_eta) && all_zero(kernel.eta_nu) &&
                      all_zero(kernel.mu_mu) && kernel.cross_rows == 0;
    return f;
}

} // namespace esle
