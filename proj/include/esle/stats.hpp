#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "esle/errors.hpp"
#include "esle/pauli.hpp"

namespace esle {

// Streaming moments of the trajectory density matrices, one slot per
// reported time index. Everything is kept as raw pooled sums (complex sums
// and sums of squared real/imaginary parts), so merging partials is plain
// addition: exact, associative, and bitwise commutative.
class EnsembleStats {
  public:
    // tracked quantities per time index, each with (sum_re, sum_im,
    // sumsq_re, sumsq_im): the four matrix entries, sz = r11 - r22,
    // sx = r12 + r21, the trace, and the hermiticity defect r12 - conj(r21)
    static constexpr std::size_t kQuantities = 8;
    static constexpr std::size_t kFields = 4 * kQuantities;
    enum Q { R11 = 0, R12, R21, R22, SZ, SX, TR, HERM };

    std::uint64_t config_hash = 0;
    std::size_t n_report = 0;
    std::size_t count = 0;    // accepted trajectories
    std::size_t diverged = 0; // rejected trajectories
    std::vector<double> data; // n_report * kFields

    void init(std::uint64_t hash, std::size_t n_report_points) {
        config_hash = hash;
        n_report = n_report_points;
        count = 0;
        diverged = 0;
        data.assign(n_report * kFields, 0.0);
    }

    std::size_t launched() const { return count + diverged; }

    void add_sample(std::size_t idx, const Mat2& rho) {
        double* d = &data[idx * kFields];
        auto put = [&](std::size_t q, cplx v) {
            double* f = d + 4 * q;
            f[0] += v.real();
            f[1] += v.imag();
            f[2] += v.real() * v.real();
            f[3] += v.imag() * v.imag();
        };
        put(R11, rho.a11);
        put(R12, rho.a12);
        put(R21, rho.a21);
        put(R22, rho.a22);
        put(SZ, rho.a11 - rho.a22);
        put(SX, rho.a12 + rho.a21);
        put(TR, rho.a11 + rho.a22);
        put(HERM, rho.a12 - std::conj(rho.a21));
    }

    void finish_trajectory() { ++count; }
    void count_diverged() { ++diverged; }

    void merge(const EnsembleStats& o) {
        if (o.config_hash != config_hash || o.n_report != n_report)
            throw EnsembleError("EnsembleStats::merge: config hash or shape mismatch");
        for (std::size_t i = 0; i < data.size(); ++i) data[i] += o.data[i];
        count += o.count;
        diverged += o.diverged;
    }

    cplx mean(std::size_t idx, Q q) const {
        const double* f = &data[idx * kFields + 4 * q];
        const double inv = 1.0 / static_cast<double>(count);
        return {f[0] * inv, f[1] * inv};
    }

    // sample variance of the real (or imaginary) part
    double variance(std::size_t idx, Q q, bool imag_part = false) const {
        if (count < 2) return 0.0;
        const double* f = &data[idx * kFields + 4 * q];
        const double sum = imag_part ? f[1] : f[0];
        const double sumsq = imag_part ? f[3] : f[2];
        const double nd = static_cast<double>(count);
        const double v = (sumsq - sum * sum / nd) / (nd - 1.0);
        return v > 0.0 ? v : 0.0;
    }

    double sem(std::size_t idx, Q q, bool imag_part = false) const {
        return count >= 2 ? std::sqrt(variance(idx, q, imag_part) / static_cast<double>(count)) : 0.0;
    }
};

// Normalized physical observables per reported time:
//   rho(t) = hermitize(<rho~(t)>) / Tr hermitize(<rho~(t)>)
// sz and sx are computed from the normalized matrix; their SEMs propagate
// the raw trajectory spread through the (slowly varying) trace denominator.
struct ObservableSeries {
    std::vector<double> t;
    std::vector<double> sz_mean, sz_sem;
    std::vector<double> sx_mean, sx_sem;
    std::vector<cplx> trace_mean;
    std::vector<cplx> rho11, rho12, rho21, rho22;
};

inline ObservableSeries make_observable_series(const EnsembleStats& stats,
                                               std::span<const double> times) {
    if (stats.count == 0) throw EnsembleError("make_observable_series: empty ensemble");
    ObservableSeries s;
    const std::size_t n = stats.n_report;
    s.t.assign(times.begin(), times.end());
    s.sz_mean.resize(n);
    s.sz_sem.resize(n);
    s.sx_mean.resize(n);
    s.sx_sem.resize(n);
    s.trace_mean.resize(n);
    s.rho11.resize(n);
    s.rho12.resize(n);
    s.rho21.resize(n);
    s.rho22.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const cplx m11 = stats.mean(i, EnsembleStats::R11);
        const cplx m12 = stats.mean(i, EnsembleStats::R12);
        const cplx m21 = stats.mean(i, EnsembleStats::R21);
        const cplx m22 = stats.mean(i, EnsembleStats::R22);
        s.trace_mean[i] = m11 + m22;
        // hermitize, then normalize by the (real) trace
        const cplx h11(m11.real(), 0.0);
        const cplx h22(m22.real(), 0.0);
        const cplx h12 = 0.5 * (m12 + std::conj(m21));
        const double tr = m11.real() + m22.real();
        const double inv = tr != 0.0 ? 1.0 / tr : 0.0;
        s.rho11[i] = h11 * inv;
        s.rho12[i] = h12 * inv;
        s.rho21[i] = std::conj(h12) * inv;
        s.rho22[i] = h22 * inv;
        s.sz_mean[i] = (h11.real() - h22.real()) * inv;
        s.sx_mean[i] = 2.0 * h12.real() * inv;
        const double ainv = std::abs(inv);
        s.sz_sem[i] = stats.sem(i, EnsembleStats::SZ) * ainv;
        s.sx_sem[i] = stats.sem(i, EnsembleStats::SX) * ainv;
    }
    return s;
}

// Damped-cosine tail fit  A e^{-gamma u} cos(omega u + phi) + C  over the
// window, with a plain tail-mean fallback when the oscillatory model is
// unidentifiable. Returns the asymptote C and its standard error.
struct AsymptoteFit {
    double c = 0.0;
    double c_stderr = 0.0;
    double amplitude = 0.0;
    double gamma = 0.0;
    double omega = 0.0;
    double phase = 0.0;
    bool fallback = false;
};

namespace detail {

struct LinFit {
    double sse = 0.0;
    double a = 0.0, b = 0.0, c = 0.0; // a cos + b sin + c
    double c_var = 0.0;               // unscaled (X^T X)^-1 [2][2]
    bool ok = false;
};

inline LinFit damped_cosine_ls(std::span<const double> u, std::span<const double> y,
                               double gamma, double omega) {
    const std::size_t n = u.size();
    double m[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
    double r[3] = {0, 0, 0};
    for (std::size_t i = 0; i < n; ++i) {
        const double e = std::exp(-gamma * u[i]);
        const double x0 = e * std::cos(omega * u[i]);
        const double x1 = e * std::sin(omega * u[i]);
        const double x2 = 1.0;
        const double xs[3] = {x0, x1, x2};
        for (int p = 0; p < 3; ++p) {
            for (int q = 0; q < 3; ++q) m[p][q] += xs[p] * xs[q];
            r[p] += xs[p] * y[i];
        }
    }
    // solve 3x3 with partial pivoting; also invert for the variance element
    double aug[3][6];
    for (int p = 0; p < 3; ++p) {
        for (int q = 0; q < 3; ++q) aug[p][q] = m[p][q];
        for (int q = 0; q < 3; ++q) aug[p][3 + q] = (p == q) ? 1.0 : 0.0;
    }
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int p = col + 1; p < 3; ++p)
            if (std::abs(aug[p][col]) > std::abs(aug[piv][col])) piv = p;
        if (std::abs(aug[piv][col]) < 1e-12) return {};
        if (piv != col)
            for (int q = 0; q < 6; ++q) std::swap(aug[piv][q], aug[col][q]);
        const double d = aug[col][col];
        for (int q = 0; q < 6; ++q) aug[col][q] /= d;
        for (int p = 0; p < 3; ++p) {
            if (p == col) continue;
            const double f = aug[p][col];
            for (int q = 0; q < 6; ++q) aug[p][q] -= f * aug[col][q];
        }
    }
    LinFit fit;
    fit.a = aug[0][3] * r[0] + aug[0][4] * r[1] + aug[0][5] * r[2];
    fit.b = aug[1][3] * r[0] + aug[1][4] * r[1] + aug[1][5] * r[2];
    fit.c = aug[2][3] * r[0] + aug[2][4] * r[1] + aug[2][5] * r[2];
    fit.c_var = aug[2][5];
    fit.sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = std::exp(-gamma * u[i]);
        const double pred = fit.a * e * std::cos(omega * u[i]) + fit.b * e * std::sin(omega * u[i]) + fit.c;
        const double d = y[i] - pred;
        fit.sse += d * d;
    }
    fit.ok = true;
    return fit;
}

} // namespace detail

inline AsymptoteFit extrapolate_asymptote(std::span<const double> times,
                                          std::span<const double> values) {
    const std::size_t n = times.size();
    if (n < 20 || values.size() != n)
        throw InsufficientDataError("extrapolate_asymptote: window must have >= 20 points");
    std::vector<double> u(n), y(values.begin(), values.end());
    for (std::size_t i = 0; i < n; ++i) u[i] = times[i] - times[0];
    const double span_u = u.back();

    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(n);
    double sse_const = 0.0, absmax = 0.0;
    for (double v : y) {
        sse_const += (v - mean) * (v - mean);
        absmax = std::max(absmax, std::abs(v - mean));
    }

    AsymptoteFit out;
    auto fallback = [&] {
        out.fallback = true;
        out.c = mean;
        out.c_stderr = n >= 2 ? std::sqrt(sse_const / static_cast<double>(n - 1) / static_cast<double>(n)) : 0.0;
        return out;
    };
    if (absmax == 0.0 || span_u <= 0.0) return fallback();

    const double du = span_u / static_cast<double>(n - 1);
    const double omega_lo = 1.5 * M_PI / span_u; // at least ~3/4 period in window
    const double omega_hi = 0.9 * M_PI / du;
    if (omega_hi <= omega_lo) return fallback();

    std::vector<double> gammas = {0.0};
    for (int k = 0; k < 7; ++k) gammas.push_back((0.25 * std::pow(2.0, k)) / span_u);

    // grid search runs on a decimated copy to keep the cost bounded; the
    // final fit below uses every point
    std::vector<double> us = u, ys = y;
    const std::size_t search_cap = 8192;
    if (n > search_cap) {
        const std::size_t step = (n + search_cap - 1) / search_cap;
        us.clear();
        ys.clear();
        for (std::size_t i = 0; i < n; i += step) {
            us.push_back(u[i]);
            ys.push_back(y[i]);
        }
    }
    double sse_const_s = 0.0, mean_s = 0.0;
    for (double v : ys) mean_s += v;
    mean_s /= static_cast<double>(ys.size());
    for (double v : ys) sse_const_s += (v - mean_s) * (v - mean_s);

    double best_sse = sse_const_s;
    double best_gamma = 0.0, best_omega = 0.0;
    bool found = false;
    const int n_omega = 400;
    for (double g : gammas) {
        for (int k = 0; k < n_omega; ++k) {
            const double w = omega_lo + (omega_hi - omega_lo) * k / (n_omega - 1.0);
            auto fit = detail::damped_cosine_ls(us, ys, g, w);
            if (fit.ok && fit.sse < best_sse) {
                best_sse = fit.sse;
                best_gamma = g;
                best_omega = w;
                found = true;
            }
        }
    }
    if (!found) return fallback();

    // local coordinate refinement (still on the decimated copy)
    double step_w = (omega_hi - omega_lo) / (n_omega - 1.0);
    double step_g = best_gamma > 0.0 ? 0.5 * best_gamma : 0.25 / span_u;
    for (int round = 0; round < 24; ++round) {
        bool improved = false;
        for (double w : {best_omega - step_w, best_omega + step_w}) {
            if (w <= 0.0) continue;
            auto fit = detail::damped_cosine_ls(us, ys, best_gamma, w);
            if (fit.ok && fit.sse < best_sse) {
                best_sse = fit.sse;
                best_omega = w;
                improved = true;
            }
        }
        for (double g : {best_gamma - step_g, best_gamma + step_g}) {
            if (g < 0.0) continue;
            auto fit = detail::damped_cosine_ls(us, ys, g, best_omega);
            if (fit.ok && fit.sse < best_sse) {
                best_sse = fit.sse;
                best_gamma = g;
                improved = true;
            }
        }
        if (!improved) {
            step_w *= 0.5;
            step_g *= 0.5;
        }
    }

    auto fit = detail::damped_cosine_ls(u, y, best_gamma, best_omega);
    if (!fit.ok) return fallback();
    const double amp = std::hypot(fit.a, fit.b);
    // degenerate: no real improvement over a constant, or vanishing amplitude
    if (fit.sse > 0.8 * sse_const || amp < 1e-12 * std::abs(mean) + 1e-300)
        return fallback();
    out.fallback = false;
    out.c = fit.c;
    out.amplitude = amp;
    out.gamma = best_gamma;
    out.omega = best_omega;
    out.phase = std::atan2(-fit.b, fit.a);
    const std::size_t dof = n > 3 ? n - 3 : 1;
    const double s2 = fit.sse / static_cast<double>(dof);
    out.c_stderr = std::sqrt(std::max(0.0, s2 * fit.c_var));
    return out;
}

} // namespace esle
