#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "esle/bath.hpp"
#include "esle/parallel.hpp"
#include "esle/quadrature.hpp"

namespace esle {

using cplx = std::complex<double>;

// Ohmic spectral density with algebraic cutoff.
inline double ohmic_spectral_density(double omega, const BathSpec& spec) {
    if (omega < 0.0) throw DomainError("ohmic_spectral_density: omega must be >= 0");
    const double x = omega / spec.omega_c;
    const double d = 1.0 + x * x;
    return spec.alpha * (omega / (d * d));
}

namespace detail {

// I(omega) / (1 - e^{-beta hbar omega}), with the finite omega->0 limit
// alpha/(beta hbar) substituted below 1e-6*omega_c to avoid the 0/0
// endpoint evaluation. The coth-weighted integrands are assembled from this
// so that nothing exponentially large ever appears.
inline double thermal_weight(double omega, const BathSpec& spec) {
    if (omega < 1e-6 * spec.omega_c) return spec.alpha / spec.beta_hbar();
    const double x = omega / spec.omega_c;
    const double d = 1.0 + x * x;
    return spec.alpha * (omega / (d * d)) / (1.0 - std::exp(-spec.beta_hbar() * omega));
}

inline double omega_floor(const BathSpec& spec) {
    // beyond this the thermal prefactors are within 0.1% of their limits,
    // so the tail envelope below is valid with a small safety factor
    return std::max(8.0 * spec.omega_c, 8.0 / spec.beta_hbar());
}

inline double shape_scale(const BathSpec& spec) {
    return std::min(spec.omega_c, 1.0 / spec.beta_hbar());
}

// crude magnitude proxy used to seed the self-scaling tolerance
inline double scale_proxy(const BathSpec& spec) {
    return (spec.hbar / M_PI) * spec.alpha * spec.omega_c * spec.omega_c;
}

} // namespace detail

// Accuracy control for kernel evaluation. With scale_hint == 0 the target is
// relative to the value itself (two-pass, self-scaled); a table builder sets
// scale_hint to the kernel peak so that far-tail points are held to an
// absolute tolerance instead of an unattainable relative one.
struct KernelAccuracy {
    double rel = 1e-9;
    double scale_hint = 0.0;
    bool check = false; // verify by panel doubling, throw on disagreement
};

namespace detail {

template <class F>
cplx eval_kernel_integral(F&& integrand, const BathSpec& spec, quad::TailParams tp,
                          const KernelAccuracy& acc, const char* what) {
    const double omega_min = omega_floor(spec);
    const double s0 = shape_scale(spec);
    const double pref = spec.hbar / M_PI;
    try {
        if (acc.scale_hint > 0.0) {
            const double tol = acc.rel * acc.scale_hint / pref;
            return integrate_half_line(integrand, omega_min, tp, s0, tol, acc.check);
        }
        const double tol1 = acc.rel * scale_proxy(spec) / pref;
        cplx v = integrate_half_line(integrand, omega_min, tp, s0, tol1, false);
        const double floor = 1e-6 * scale_proxy(spec) / pref;
        const double tol2 = acc.rel * std::max(std::abs(v), floor);
        if (tol2 < tol1)
            v = integrate_half_line(integrand, omega_min, tp, s0, tol2, acc.check);
        else if (acc.check)
            v = integrate_half_line(integrand, omega_min, tp, s0, tol1, true);
        return v;
    } catch (const QuadratureError& e) {
        throw QuadratureError(std::string(e.what()) + " while evaluating " + what);
    }
}

} // namespace detail

// <eta(t) eta(t')> kernel as a function of the lag; even in the lag.
inline double k_eta_eta(double t_lag, const BathSpec& spec, const KernelAccuracy& acc = {}) {
    spec.validate();
    if (spec.alpha == 0.0) return 0.0;
    const double t = std::abs(t_lag);
    const double bh = spec.beta_hbar();
    auto f = [&](double w) -> cplx {
        const double therm = detail::thermal_weight(w, spec) * (1.0 + std::exp(-bh * w));
        return cplx(therm * std::cos(w * t), 0.0);
    };
    quad::TailParams tp{spec.alpha, spec.omega_c, 1.1, 0.0, t};
    cplx v = detail::eval_kernel_integral(f, spec, tp, acc, "K_eta_eta");
    return (spec.hbar / M_PI) * v.real();
}

// <eta(t) nu(t')> kernel; causal (zero for non-positive lag, Theta(0) = 0)
// and purely imaginary.
inline cplx k_eta_nu(double t_lag, const BathSpec& spec, const KernelAccuracy& acc = {}) {
    spec.validate();
    if (spec.alpha == 0.0 || t_lag <= 0.0) return cplx(0.0, 0.0);
    auto f = [&](double w) -> cplx {
        const double x = w / spec.omega_c;
        const double d = 1.0 + x * x;
        return cplx(spec.alpha * (w / (d * d)) * std::sin(w * t_lag), 0.0);
    };
    quad::TailParams tp{spec.alpha, spec.omega_c, 1.0, 0.0, t_lag};
    cplx v = detail::eval_kernel_integral(f, spec, tp, acc, "K_eta_nu");
    return cplx(0.0, -(2.0 / M_PI) * v.real());
}

// <mu(tau) mu(tau')> kernel over the imaginary-time lag, |lag| <= beta*hbar.
// The integrand cosh(w s) coth(beta hbar w / 2) - sinh(w |s|) is evaluated in
// the equivalent form [e^{-w(beta hbar - |s|)} + e^{-w |s|}] / (1 - e^{-beta hbar w}),
// which stays bounded instead of cancelling exponentially large terms.
inline double k_mu_mu(double tau_lag, const BathSpec& spec, const KernelAccuracy& acc = {}) {
    spec.validate();
    const double bh = spec.beta_hbar();
    const double s = std::abs(tau_lag);
    if (s > bh * (1.0 + 1e-12)) throw DomainError("k_mu_mu: |tau_lag| must be <= beta*hbar");
    if (spec.alpha == 0.0) return 0.0;
    const double g1 = s;
    const double g2 = std::max(bh - s, 0.0);
    auto f = [&](double w) -> cplx {
        const double therm = detail::thermal_weight(w, spec);
        return cplx(therm * (std::exp(-w * g2) + std::exp(-w * g1)), 0.0);
    };
    quad::TailParams tp{spec.alpha, spec.omega_c, 2.1, std::min(g1, g2), 0.0};
    cplx v = detail::eval_kernel_integral(f, spec, tp, acc, "K_mu_mu");
    return (spec.hbar / M_PI) * v.real();
}

// Cross-time kernel <eta(t) mu(tau)> at elapsed real time t >= 0 and
// tau in [0, beta*hbar]. Real for t = 0 by construction.
inline cplx k_eta_mu(double t, double tau, const BathSpec& spec, const KernelAccuracy& acc = {}) {
    spec.validate();
    const double bh = spec.beta_hbar();
    if (t < 0.0) throw DomainError("k_eta_mu: t must be >= 0");
    if (tau < -1e-12 || tau > bh * (1.0 + 1e-12)) throw DomainError("k_eta_mu: tau must be in [0, beta*hbar]");
    if (spec.alpha == 0.0) return cplx(0.0, 0.0);
    const double g1 = std::clamp(tau, 0.0, bh);
    const double g2 = bh - g1;
    auto f = [&](double w) -> cplx {
        const double therm = detail::thermal_weight(w, spec);
        const double e1 = std::exp(-w * g1);
        const double e2 = std::exp(-w * g2);
        const double c = std::cos(w * t);
        const double sn = std::sin(w * t);
        return cplx(therm * (e1 + e2) * c, therm * (e2 - e1) * sn);
    };
    quad::TailParams tp{spec.alpha, spec.omega_c, 2.1, std::min(g1, g2), t};
    cplx v = detail::eval_kernel_integral(f, spec, tp, acc, "K_eta_mu");
    return -(spec.hbar / M_PI) * v;
}

// The four kernels sampled on the simulation grids. k_eta_eta is stored for
// lags 0..N and read with even reflection; k_eta_nu for lags 0..N (zero at
// non-positive lag); k_mu_mu for lags -M..M; the cross-time kernel row-major
// over (elapsed index, tau index) with rows beyond cross_rows identically
// zero (the kernel has decayed below tolerance there).
struct KernelTable {
    std::size_t n = 0;
    std::size_t m = 0;
    std::vector<double> eta_eta;
    std::vector<cplx> eta_nu;
    std::vector<double> mu_mu;
    std::vector<cplx> eta_mu;
    std::size_t cross_rows = 0;

    double eta_eta_at(long lag) const { return eta_eta[static_cast<std::size_t>(std::labs(lag))]; }
    cplx eta_nu_at(long lag) const {
        return lag > 0 ? eta_nu[static_cast<std::size_t>(lag)] : cplx(0.0, 0.0);
    }
    double mu_mu_at(long lag) const { return mu_mu[static_cast<std::size_t>(lag + static_cast<long>(m))]; }
    cplx eta_mu_at(std::size_t i, std::size_t j) const {
        return i < cross_rows ? eta_mu[i * (m + 1) + j] : cplx(0.0, 0.0);
    }
};

struct TableAccuracy {
    double rel_stationary = 1e-8; // relative to the kernel value at zero lag
    double rel_cross = 1e-6;      // relative to the cross kernel peak
    unsigned threads = 0;
};

namespace detail {

// Lags are evaluated densely until `run` consecutive magnitudes fall below
// cut; the remainder is filled with zeros. Valid because every kernel here
// is analytic in a strip around the real frequency axis and therefore decays
// exponentially in the lag; a handful of spot checks guards the cutoff.
struct ZeroTail {
    std::size_t dense_until;
    bool verified;
};

} // namespace detail

inline KernelTable build_kernel_table(const BathSpec& spec, const TimeGrids& grids,
                                      const TableAccuracy& acc = {}) {
    spec.validate();
    grids.validate(spec);
    KernelTable table;
    table.n = grids.n_steps;
    table.m = grids.m_steps;
    const std::size_t np = grids.n_points();
    const std::size_t mp = grids.m_points();
    table.eta_eta.assign(np, 0.0);
    table.eta_nu.assign(np, cplx(0.0, 0.0));
    table.mu_mu.assign(2 * grids.m_steps + 1, 0.0);
    if (spec.alpha == 0.0) {
        table.eta_mu.clear();
        table.cross_rows = 0;
        return table;
    }

    const double k0 = k_eta_eta(0.0, spec, {1e-10, 0.0, true});
    const double tol_stat = acc.rel_stationary * std::abs(k0);
    KernelAccuracy stat_acc{acc.rel_stationary, std::abs(k0), false};

    // K_eta_eta lags, dense until the exponential decay is established
    {
        const std::size_t run_needed = 48;
        std::atomic<std::size_t> small_run{0};
        std::size_t dense_until = np;
        std::size_t run = 0;
        std::size_t i = 0;
        table.eta_eta[0] = k0;
        for (i = 1; i < np; ++i) {
            table.eta_eta[i] = k_eta_eta(grids.dt * static_cast<double>(i), spec, stat_acc);
            if (std::abs(table.eta_eta[i]) < 0.25 * tol_stat) {
                if (++run >= run_needed) { dense_until = i + 1; break; }
            } else {
                run = 0;
            }
        }
        if (dense_until < np) {
            for (std::size_t k = dense_until; k < np; ++k) table.eta_eta[k] = 0.0;
            for (std::size_t probe = dense_until; probe < np; probe += std::max<std::size_t>(1, (np - dense_until) / 6)) {
                double v = k_eta_eta(grids.dt * static_cast<double>(probe), spec, stat_acc);
                if (std::abs(v) > tol_stat) {
                    // decay assumption failed; fill the rest densely
                    parallel_for(np - dense_until, [&](std::size_t k) {
                        std::size_t idx = dense_until + k;
                        table.eta_eta[idx] = k_eta_eta(grids.dt * static_cast<double>(idx), spec, stat_acc);
                    }, acc.threads);
                    break;
                }
            }
        }
    }

    // K_eta_nu lags (lag 0 stays exactly zero)
    {
        const std::size_t run_needed = 48;
        std::size_t run = 0;
        std::size_t dense_until = np;
        for (std::size_t i = 1; i < np; ++i) {
            table.eta_nu[i] = k_eta_nu(grids.dt * static_cast<double>(i), spec, stat_acc);
            if (std::abs(table.eta_nu[i]) < 0.25 * tol_stat) {
                if (++run >= run_needed) { dense_until = i + 1; break; }
            } else {
                run = 0;
            }
        }
        for (std::size_t k = dense_until; k < np; ++k) table.eta_nu[k] = cplx(0.0, 0.0);
    }

    // K_mu_mu over lags -M..M (even in the lag)
    {
        std::vector<double> half(mp, 0.0);
        parallel_for(mp, [&](std::size_t j) {
            half[j] = k_mu_mu(grids.dtau * static_cast<double>(j), spec, stat_acc);
        }, acc.threads);
        for (std::size_t j = 0; j < mp; ++j) {
            table.mu_mu[grids.m_steps + j] = half[j];
            table.mu_mu[grids.m_steps - j] = half[j];
        }
    }

    // Cross-time kernel rows; stop once a run of rows is negligible.
    {
        const double peak = std::abs(k_eta_mu(0.0, 0.5 * spec.beta_hbar(), spec, {1e-9, 0.0, false}));
        KernelAccuracy cross_acc{acc.rel_cross, std::max(peak, std::abs(k0)), false};
        const double tol_cross = acc.rel_cross * cross_acc.scale_hint;
        std::vector<cplx> rows;
        rows.reserve(std::min<std::size_t>(np, 4096) * mp);
        std::size_t run = 0;
        std::size_t i = 0;
        std::vector<cplx> row(mp);
        for (i = 0; i < np; ++i) {
            const double t = grids.elapsed(i);
            parallel_for(mp, [&](std::size_t j) {
                row[j] = k_eta_mu(t, grids.tau(j), spec, cross_acc);
            }, acc.threads);
            rows.insert(rows.end(), row.begin(), row.end());
            double rmax = 0.0;
            for (const auto& v : row) rmax = std::max(rmax, std::abs(v));
            if (rmax < 0.25 * tol_cross) {
                if (++run >= 3) { ++i; break; }
            } else {
                run = 0;
            }
        }
        std::size_t cut = i;
        if (cut < np) {
            // guard the cutoff with a couple of later rows
            for (std::size_t probe : {std::min(np - 1, 2 * cut), np - 1}) {
                double rmax = 0.0;
                for (std::size_t j = 0; j < mp; ++j)
                    rmax = std::max(rmax, std::abs(k_eta_mu(grids.elapsed(probe), grids.tau(j), spec, cross_acc)));
                if (rmax > tol_cross)
                    throw QuadratureError("build_kernel_table: cross-time kernel cutoff check failed");
            }
        }
        table.eta_mu = std::move(rows);
        table.cross_rows = cut;
    }

    for (double v : table.eta_eta)
        if (!std::isfinite(v)) throw QuadratureError("build_kernel_table: non-finite K_eta_eta entry");
    for (const auto& v : table.eta_nu)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw QuadratureError("build_kernel_table: non-finite K_eta_nu entry");
    for (double v : table.mu_mu)
        if (!std::isfinite(v)) throw QuadratureError("build_kernel_table: non-finite K_mu_mu entry");
    for (const auto& v : table.eta_mu)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw QuadratureError("build_kernel_table: non-finite K_eta_mu entry");
    return table;
}

} // namespace esle
