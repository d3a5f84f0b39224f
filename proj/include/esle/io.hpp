#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "esle/errors.hpp"
#include "esle/filters.hpp"
#include "esle/kernels.hpp"
#include "esle/noise.hpp"
#include "esle/stats.hpp"
#include "esle/version.hpp"

namespace esle::io {

// Locale-independent, full round-trip precision.
inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string hash_hex(std::uint64_t h) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(h));
    return buf;
}

class CsvWriter {
  public:
    CsvWriter(const std::string& path, std::uint64_t config_hash, const std::string& columns)
        : out_(path, std::ios::trunc) {
        if (!out_) throw ConfigError("io: cannot open output file " + path);
        out_ << "# esle " << kVersion << " config_hash=" << hash_hex(config_hash) << "\n";
        out_ << columns << "\n";
    }

    void row(const std::vector<double>& values) {
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i) out_ << ",";
            out_ << fmt(values[i]);
        }
        out_ << "\n";
    }

    void raw_row(const std::string& line) { out_ << line << "\n"; }

  private:
    std::ofstream out_;
};

inline void write_series_csv(const std::string& path, const ObservableSeries& s,
                             std::uint64_t config_hash) {
    CsvWriter csv(path, config_hash,
                  "t,sz_mean,sz_sem,sx_mean,sx_sem,re_rho11,im_rho11,re_rho12,im_rho12,"
                  "re_rho21,im_rho21,re_rho22,im_rho22,re_trace,im_trace");
    for (std::size_t i = 0; i < s.t.size(); ++i) {
        csv.row({s.t[i], s.sz_mean[i], s.sz_sem[i], s.sx_mean[i], s.sx_sem[i],
                 s.rho11[i].real(), s.rho11[i].imag(), s.rho12[i].real(), s.rho12[i].imag(),
                 s.rho21[i].real(), s.rho21[i].imag(), s.rho22[i].real(), s.rho22[i].imag(),
                 s.trace_mean[i].real(), s.trace_mean[i].imag()});
    }
}

// Kernel dumps: one file per kernel, columns (lag_or_t, tau_if_applicable, re, im).
inline void write_kernel_dumps(const std::string& dir, const KernelTable& table,
                               const TimeGrids& grids, std::uint64_t config_hash) {
    std::filesystem::create_directories(dir);
    {
        CsvWriter csv(dir + "/kernel_eta_eta.csv", config_hash, "lag_or_t,tau_if_applicable,re,im");
        for (std::size_t k = 0; k <= table.n; ++k)
            csv.raw_row(fmt(grids.dt * static_cast<double>(k)) + ",," + fmt(table.eta_eta[k]) + ",0");
    }
    {
        CsvWriter csv(dir + "/kernel_eta_nu.csv", config_hash, "lag_or_t,tau_if_applicable,re,im");
        for (std::size_t k = 0; k <= table.n; ++k)
            csv.raw_row(fmt(grids.dt * static_cast<double>(k)) + ",," +
                        fmt(table.eta_nu[k].real()) + "," + fmt(table.eta_nu[k].imag()));
    }
    {
        CsvWriter csv(dir + "/kernel_mu_mu.csv", config_hash, "lag_or_t,tau_if_applicable,re,im");
        for (long lag = -static_cast<long>(table.m); lag <= static_cast<long>(table.m); ++lag)
            csv.raw_row(fmt(grids.dtau * static_cast<double>(lag)) + ",," +
                        fmt(table.mu_mu_at(lag)) + ",0");
    }
    {
        CsvWriter csv(dir + "/kernel_eta_mu.csv", config_hash, "lag_or_t,tau_if_applicable,re,im");
        for (std::size_t i = 0; i <= table.n; ++i)
            for (std::size_t j = 0; j <= table.m; ++j) {
                const cplx v = table.eta_mu_at(i, j);
                csv.raw_row(fmt(grids.elapsed(i)) + "," + fmt(grids.tau(j)) + "," +
                            fmt(v.real()) + "," + fmt(v.imag()));
            }
    }
}

inline void write_filter_diagnostics(const std::string& path, const FilterSet& f,
                                     std::uint64_t config_hash) {
    CsvWriter csv(path, config_hash,
                  "spectrum,most_negative_bin,max_bin,clamped_bins,residual,dft_length");
    csv.raw_row("g_eta_eta," + fmt(f.diag.eta_eta.most_negative_bin) + "," +
                fmt(f.diag.eta_eta.max_bin) + "," + std::to_string(f.diag.eta_eta.clamped_bins) +
                "," + fmt(f.diag.eta_eta.residual) + "," + std::to_string(f.pad_t));
    csv.raw_row("g_mu_mu," + fmt(f.diag.mu_mu.most_negative_bin) + "," +
                fmt(f.diag.mu_mu.max_bin) + "," + std::to_string(f.diag.mu_mu.clamped_bins) + "," +
                fmt(f.diag.mu_mu.residual) + "," + std::to_string(f.circle_tau));
}

// Covariance dumps, columns (t_or_tau_row, t_or_tau_col_or_slice,
// re_target, im_target, re_sample, im_sample).
inline void write_covariance_csvs(const std::string& dir, const CovarianceAccumulator& acc,
                                  const KernelTable& table, const TimeGrids& grids,
                                  std::uint64_t config_hash) {
    std::filesystem::create_directories(dir);
    const double inv = 1.0 / static_cast<double>(acc.count);
    const std::size_t np = acc.n + 1, mp = acc.m + 1;
    auto dump = [&](const std::string& name, const std::vector<cplx>& sums, std::size_t cols,
                    auto target, auto row_coord, auto col_coord) {
        CsvWriter csv(dir + "/cov_" + name + ".csv", config_hash,
                      "t_or_tau_row,t_or_tau_col_or_slice,re_target,im_target,re_sample,im_sample");
        const std::size_t rows = sums.size() / cols;
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t k = 0; k < cols; ++k) {
                const cplx tgt = target(i, k);
                const cplx smp = sums[i * cols + k] * inv;
                csv.row({row_coord(i), col_coord(k), tgt.real(), tgt.imag(), smp.real(), smp.imag()});
            }
    };
    auto tcoord = [&](std::size_t i) { return grids.elapsed(i); };
    auto taucoord = [&](std::size_t j) { return grids.tau(j); };
    dump("eta_eta", acc.ee, np,
         [&](std::size_t i, std::size_t k) {
             return cplx(table.eta_eta_at(static_cast<long>(i) - static_cast<long>(k)), 0.0);
         },
         tcoord, tcoord);
    dump("eta_nu", acc.en, np,
         [&](std::size_t i, std::size_t k) {
             return table.eta_nu_at(static_cast<long>(i) - static_cast<long>(k));
         },
         tcoord, tcoord);
    dump("nu_nu", acc.nn, np, [&](std::size_t, std::size_t) { return cplx(0.0, 0.0); }, tcoord,
         tcoord);
    dump("mu_mu", acc.mm, mp,
         [&](std::size_t j, std::size_t l) {
             return cplx(table.mu_mu_at(static_cast<long>(j) - static_cast<long>(l)), 0.0);
         },
         taucoord, taucoord);
    dump("eta_mu", acc.em, mp, [&](std::size_t i, std::size_t j) { return table.eta_mu_at(i, j); },
         tcoord, taucoord);
    dump("nu_mu", acc.nm, mp, [&](std::size_t, std::size_t) { return cplx(0.0, 0.0); }, tcoord,
         taucoord);
}

} // namespace esle::io
