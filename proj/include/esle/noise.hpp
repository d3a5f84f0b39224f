#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "esle/bath.hpp"
#include "esle/errors.hpp"
#include "esle/filters.hpp"
#include "esle/rng.hpp"

namespace esle {

// Stream ids for the six white-noise processes of one trajectory.
enum WhiteStream : std::uint64_t {
    kStreamX1 = 0,
    kStreamX2 = 1,
    kStreamX3 = 2,
    kStreamXb1 = 3,
    kStreamXb2 = 4,
    kStreamXb3 = 5,
};

// One draw of the six independent white-noise vectors, entries Gaussian with
// variance 1/dt (real time) or 1/dtau (imaginary time). x1 spans the padded
// real-time circle and xb1 the doubled imaginary-time circle, so the
// stationary channels see stationary input everywhere in the window; the
// remaining streams only ever enter through pointwise (delta) couplings and
// stay on the plain grids.
struct WhiteDraw {
    std::vector<double> x1;  // length pad_t
    std::vector<double> x2;  // length N+1
    std::vector<double> x3;  // length N+1
    std::vector<double> xb1; // length 2M
    std::vector<double> xb2; // length M+1
    std::vector<double> xb3; // length M+1
};

struct WhiteLayout {
    std::size_t pad_t = 0;
    std::size_t circle_tau = 0;
    static WhiteLayout of(const FilterSet& f) { return {f.pad_t, f.circle_tau}; }
};

inline void draw_whites(std::uint64_t seed, std::uint64_t trajectory, const TimeGrids& grids,
                        const WhiteLayout& layout, WhiteDraw& w, bool imaginary_streams = true) {
    const double st = 1.0 / std::sqrt(grids.dt);
    const double stau = 1.0 / std::sqrt(grids.dtau);
    rng::NormalStream(seed, trajectory, kStreamX1).fill(w.x1, layout.pad_t, st);
    rng::NormalStream(seed, trajectory, kStreamX2).fill(w.x2, grids.n_points(), st);
    rng::NormalStream(seed, trajectory, kStreamX3).fill(w.x3, grids.n_points(), st);
    if (imaginary_streams) {
        rng::NormalStream(seed, trajectory, kStreamXb1).fill(w.xb1, layout.circle_tau, stau);
        rng::NormalStream(seed, trajectory, kStreamXb2).fill(w.xb2, grids.m_points(), stau);
        rng::NormalStream(seed, trajectory, kStreamXb3).fill(w.xb3, grids.m_points(), stau);
    } else {
        w.xb1.clear();
        w.xb2.clear();
        w.xb3.clear();
    }
}

// One realization of the three correlated complex processes.
struct NoiseRealization {
    std::vector<cplx> eta; // N+1
    std::vector<cplx> nu;  // N+1
    std::vector<cplx> mu;  // M+1
};

struct NoiseWorkspace {
    std::vector<cplx> buf_t;
    std::vector<cplx> buf_tau;
    std::vector<cplx> wtau;
};

// Assemble eta, nu, mu from the whites:
//   eta = G_eta_eta * x1 + G_eta_nu * (x2 + i x3) + dtau * G_eta_mu (xb2 + i xb3)
//   nu  = x3 + i x2                       (delta companion of G_eta_nu)
//   mu  = G_mu_mu * xb1 + (xb3 + i xb2)   (delta companion of G_eta_mu)
// Stationary convolutions run on the padded/doubled circles via the DFT; the
// cross-time component is a dense matrix product. The same x2/x3 pair feeds
// eta_nu and nu with the roles swapped, and the same xb2/xb3 pair feeds
// eta_mu and mu_eta: that reuse is what creates the cross-correlations.
// `include_cross_time = false` zeroes the cross-time channel (SLE family).
inline void synthesize(const FilterSet& f, const WhiteDraw& w, const TimeGrids& grids,
                       NoiseWorkspace& ws, NoiseRealization& out,
                       bool include_cross_time = true) {
    if (f.n != grids.n_steps || f.m != grids.m_steps)
        throw ConfigError("synthesize: filters and grids disagree");
    if (w.x1.size() != f.pad_t || w.x2.size() != grids.n_points() || w.x3.size() != grids.n_points())
        throw ConfigError("synthesize: white draw does not match the layout");
    const std::size_t np = grids.n_points();
    const std::size_t mp = grids.m_points();
    const bool have_imag = !w.xb1.empty();
    out.eta.assign(np, cplx(0.0, 0.0));
    out.nu.assign(np, cplx(0.0, 0.0));
    out.mu.assign(mp, cplx(0.0, 0.0));
    // a decoupled bath produces no noise at all; the delta companions exist
    // only to carry the cross-correlations of the coupled case
    if (f.zero_coupling) return;

    // eta_eta channel
    ws.buf_t.assign(f.pad_t, cplx(0.0, 0.0));
    for (std::size_t k = 0; k < f.pad_t; ++k) ws.buf_t[k] = cplx(w.x1[k], 0.0);
    f.plan_t->forward(ws.buf_t);
    for (std::size_t k = 0; k < f.pad_t; ++k) ws.buf_t[k] *= f.s_eta_eta[k];
    f.plan_t->inverse(ws.buf_t);
    const double sqdt = std::sqrt(grids.dt);
    for (std::size_t i = 0; i < np; ++i) out.eta[i] += sqdt * ws.buf_t[i].real();

    // eta_nu channel
    ws.buf_t.assign(f.pad_t, cplx(0.0, 0.0));
    for (std::size_t i = 0; i < np; ++i) ws.buf_t[i] = cplx(w.x2[i], w.x3[i]);
    f.plan_t->forward(ws.buf_t);
    for (std::size_t k = 0; k < f.pad_t; ++k) ws.buf_t[k] *= f.g_eta_nu_spec[k];
    f.plan_t->inverse(ws.buf_t);
    for (std::size_t i = 0; i < np; ++i) out.eta[i] += grids.dt * ws.buf_t[i];

    // nu: delta companion, swapped pair
    for (std::size_t i = 0; i < np; ++i) out.nu[i] = cplx(w.x3[i], w.x2[i]);

    if (have_imag) {
        // mu_mu channel on the doubled circle
        ws.buf_tau.assign(f.circle_tau, cplx(0.0, 0.0));
        for (std::size_t j = 0; j < f.circle_tau; ++j) ws.buf_tau[j] = cplx(w.xb1[j], 0.0);
        f.plan_tau->forward(ws.buf_tau);
        for (std::size_t j = 0; j < f.circle_tau; ++j) ws.buf_tau[j] *= f.s_mu_mu[j];
        f.plan_tau->inverse(ws.buf_tau);
        const double sqdtau = std::sqrt(grids.dtau);
        for (std::size_t j = 0; j < mp; ++j) out.mu[j] += sqdtau * ws.buf_tau[j % f.circle_tau].real();

        // mu_eta: delta companion, swapped pair
        for (std::size_t j = 0; j < mp; ++j) out.mu[j] += cplx(w.xb3[j], w.xb2[j]);

        // eta_mu: dense cross-time application
        if (include_cross_time && f.cross_rows > 0) {
            ws.wtau.resize(mp);
            for (std::size_t j = 0; j < mp; ++j) ws.wtau[j] = cplx(w.xb2[j], w.xb3[j]);
            const std::size_t rows = std::min(f.cross_rows, np);
            for (std::size_t i = 0; i < rows; ++i) {
                cplx acc(0.0, 0.0);
                const cplx* grow = &f.g_eta_mu[i * mp];
                for (std::size_t j = 0; j < mp; ++j) acc += grow[j] * ws.wtau[j];
                out.eta[i] += grids.dtau * acc;
            }
        }
    }
}

// Same synthesis by direct summation (naive DFTs and O(N^2) circular sums).
// Reference path for the transform pipeline; used by tests.
namespace detail {

inline std::vector<cplx> naive_dft(const std::vector<cplx>& a, bool inverse) {
    const std::size_t n = a.size();
    std::vector<cplx> out(n, cplx(0.0, 0.0));
    const double sign = inverse ? 1.0 : -1.0;
    for (std::size_t k = 0; k < n; ++k) {
        cplx acc(0.0, 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            const double ang = sign * 2.0 * M_PI * static_cast<double>((j * k) % n) / static_cast<double>(n);
            acc += a[j] * cplx(std::cos(ang), std::sin(ang));
        }
        out[k] = inverse ? acc / static_cast<double>(n) : acc;
    }
    return out;
}

} // namespace detail

inline void synthesize_direct(const FilterSet& f, const WhiteDraw& w, const TimeGrids& grids,
                              NoiseRealization& out, bool include_cross_time = true) {
    const std::size_t np = grids.n_points();
    const std::size_t mp = grids.m_points();
    const bool have_imag = !w.xb1.empty();
    out.eta.assign(np, cplx(0.0, 0.0));
    out.nu.assign(np, cplx(0.0, 0.0));
    out.mu.assign(mp, cplx(0.0, 0.0));
    if (f.zero_coupling) return;

    // time-domain filter taps by naive inverse DFT
    std::vector<cplx> se(f.pad_t);
    for (std::size_t k = 0; k < f.pad_t; ++k) se[k] = cplx(f.s_eta_eta[k], 0.0);
    const std::vector<cplx> g_ee = detail::naive_dft(se, true);
    const std::vector<cplx> g_en = detail::naive_dft(f.g_eta_nu_spec, true);

    const double sqdt = std::sqrt(grids.dt);
    for (std::size_t i = 0; i < np; ++i) {
        cplx acc_ee(0.0, 0.0), acc_en(0.0, 0.0);
        for (std::size_t j = 0; j < f.pad_t; ++j) {
            const std::size_t lag = (i + f.pad_t - j) % f.pad_t;
            acc_ee += g_ee[lag] * w.x1[j];
            if (j < np) acc_en += g_en[lag] * cplx(w.x2[j], w.x3[j]);
        }
        out.eta[i] += sqdt * acc_ee.real() + grids.dt * acc_en;
        out.nu[i] = cplx(w.x3[i], w.x2[i]);
    }

    if (have_imag) {
        std::vector<cplx> sm(f.circle_tau);
        for (std::size_t k = 0; k < f.circle_tau; ++k) sm[k] = cplx(f.s_mu_mu[k], 0.0);
        const std::vector<cplx> g_mm = detail::naive_dft(sm, true);
        const double sqdtau = std::sqrt(grids.dtau);
        for (std::size_t j = 0; j < mp; ++j) {
            cplx acc(0.0, 0.0);
            for (std::size_t l = 0; l < f.circle_tau; ++l)
                acc += g_mm[(j + f.circle_tau - l) % f.circle_tau] * w.xb1[l];
            out.mu[j] = sqdtau * acc.real() + cplx(w.xb3[j], w.xb2[j]);
        }
        if (include_cross_time) {
            for (std::size_t i = 0; i < np && i < f.cross_rows; ++i) {
                cplx acc(0.0, 0.0);
                for (std::size_t j = 0; j < mp; ++j)
                    acc += f.g_eta_mu_at(i, j) * cplx(w.xb2[j], w.xb3[j]);
                out.eta[i] += grids.dtau * acc;
            }
        }
    }
}

// Streaming bilinear covariance sums (plain products, no conjugation) for
// the four target correlators and the two should-be-zero ones.
struct CovarianceAccumulator {
    std::size_t n = 0, m = 0;
    std::size_t count = 0;
    std::vector<cplx> ee; // (N+1)^2  <eta eta>
    std::vector<cplx> en; // (N+1)^2  <eta nu>
    std::vector<cplx> nn; // (N+1)^2  <nu nu>
    std::vector<cplx> mm; // (M+1)^2  <mu mu>
    std::vector<cplx> em; // (N+1)(M+1) <eta mu>
    std::vector<cplx> nm; // (N+1)(M+1) <nu mu>

    void init(std::size_t n_steps, std::size_t m_steps) {
        n = n_steps;
        m = m_steps;
        count = 0;
        const std::size_t np = n + 1, mp = m + 1;
        ee.assign(np * np, cplx(0.0, 0.0));
        en.assign(np * np, cplx(0.0, 0.0));
        nn.assign(np * np, cplx(0.0, 0.0));
        mm.assign(mp * mp, cplx(0.0, 0.0));
        em.assign(np * mp, cplx(0.0, 0.0));
        nm.assign(np * mp, cplx(0.0, 0.0));
    }

    void add(const NoiseRealization& r) {
        const std::size_t np = n + 1, mp = m + 1;
        for (std::size_t i = 0; i < np; ++i) {
            const cplx ei = r.eta[i];
            const cplx ni = r.nu[i];
            cplx* ee_row = &ee[i * np];
            cplx* en_row = &en[i * np];
            cplx* nn_row = &nn[i * np];
            for (std::size_t k = 0; k < np; ++k) {
                ee_row[k] += ei * r.eta[k];
                en_row[k] += ei * r.nu[k];
                nn_row[k] += ni * r.nu[k];
            }
            cplx* em_row = &em[i * mp];
            cplx* nm_row = &nm[i * mp];
            for (std::size_t j = 0; j < mp; ++j) {
                em_row[j] += ei * r.mu[j];
                nm_row[j] += ni * r.mu[j];
            }
        }
        for (std::size_t j = 0; j < mp; ++j) {
            const cplx mj = r.mu[j];
            cplx* mm_row = &mm[j * mp];
            for (std::size_t l = 0; l < mp; ++l) mm_row[l] += mj * r.mu[l];
        }
        ++count;
    }

    void merge(const CovarianceAccumulator& o) {
        auto addv = [](std::vector<cplx>& a, const std::vector<cplx>& b) {
            for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
        };
        addv(ee, o.ee);
        addv(en, o.en);
        addv(nn, o.nn);
        addv(mm, o.mm);
        addv(em, o.em);
        addv(nm, o.nm);
        count += o.count;
    }
};

// Per-correlator RMS deviations of the sample means against the kernel
// targets, plus the magnitude of the should-be-zero correlators.
struct CovarianceReport {
    std::size_t runs = 0;
    double k0 = 0.0; // K_eta_eta(0), the reference scale
    double rms_ee = 0.0;
    double rms_en = 0.0;
    double rms_mm = 0.0;
    double rms_em = 0.0;
    double max_nn = 0.0;
    double max_nm = 0.0;
};

inline CovarianceReport make_covariance_report(const CovarianceAccumulator& acc,
                                               const KernelTable& table) {
    if (acc.count < 2)
        throw InsufficientDataError("verify_covariances: need at least 2 realizations");
    CovarianceReport rep;
    rep.runs = acc.count;
    rep.k0 = table.eta_eta[0];
    const double inv = 1.0 / static_cast<double>(acc.count);
    const std::size_t np = acc.n + 1, mp = acc.m + 1;
    double s_ee = 0.0, s_en = 0.0, s_mm = 0.0, s_em = 0.0;
    for (std::size_t i = 0; i < np; ++i) {
        for (std::size_t k = 0; k < np; ++k) {
            const long lag = static_cast<long>(i) - static_cast<long>(k);
            const double dee = acc.ee[i * np + k].real() * inv - table.eta_eta_at(lag);
            s_ee += dee * dee;
            const cplx den = acc.en[i * np + k] * inv - table.eta_nu_at(lag);
            s_en += std::norm(den);
            rep.max_nn = std::max(rep.max_nn, std::abs(acc.nn[i * np + k]) * inv);
        }
        for (std::size_t j = 0; j < mp; ++j) {
            const cplx dem = acc.em[i * mp + j] * inv - table.eta_mu_at(i, j);
            s_em += std::norm(dem);
            rep.max_nm = std::max(rep.max_nm, std::abs(acc.nm[i * mp + j]) * inv);
        }
    }
    for (std::size_t j = 0; j < mp; ++j)
        for (std::size_t l = 0; l < mp; ++l) {
            const long lag = static_cast<long>(j) - static_cast<long>(l);
            const double dmm = acc.mm[j * mp + l].real() * inv - table.mu_mu_at(lag);
            s_mm += dmm * dmm;
        }
    rep.rms_ee = std::sqrt(s_ee / static_cast<double>(np * np));
    rep.rms_en = std::sqrt(s_en / static_cast<double>(np * np));
    rep.rms_mm = std::sqrt(s_mm / static_cast<double>(mp * mp));
    rep.rms_em = std::sqrt(s_em / static_cast<double>(np * mp));
    return rep;
}

} // namespace esle
