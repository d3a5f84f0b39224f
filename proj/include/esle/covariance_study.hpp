#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "esle/ensemble.hpp"
#include "esle/kernels.hpp"
#include "esle/noise.hpp"
#include "esle/parallel.hpp"

namespace esle {

struct RmsRow {
    std::size_t runs = 0;
    double rms_ee = 0.0;
    double rms_en = 0.0;
    double rms_mm = 0.0;
    double rms_em = 0.0;
    double max_zero = 0.0; // max over the should-be-zero correlators
};

// Generate realizations and track the sample covariances, snapshotting the
// per-kernel RMS deviations at each requested run count. Counts must be
// increasing; the accumulator keeps the final state for full dumps.
inline std::vector<RmsRow> run_covariance_study(const FilterSet& filters, const KernelTable& table,
                                                const TimeGrids& grids, std::uint64_t seed,
                                                const std::vector<std::size_t>& counts,
                                                CovarianceAccumulator& acc, unsigned threads = 0) {
    acc.init(grids.n_steps, grids.m_steps);
    const WhiteLayout layout = WhiteLayout::of(filters);
    std::vector<RmsRow> rows;
    std::size_t done = 0;
    for (std::size_t target : counts) {
        if (target <= done) throw ConfigError("covariance study: run counts must be increasing");
        const std::size_t batch = target - done;
        sharded_reduce<CovarianceAccumulator>(
            batch, kShardSize,
            [&](std::size_t, std::size_t begin, std::size_t end) {
                CovarianceAccumulator partial;
                partial.init(grids.n_steps, grids.m_steps);
                WhiteDraw w;
                NoiseWorkspace ws;
                NoiseRealization noise;
                for (std::size_t k = begin; k < end; ++k) {
                    draw_whites(seed, done + k, grids, layout, w, true);
                    synthesize(filters, w, grids, ws, noise, true);
                    partial.add(noise);
                }
                return partial;
            },
            [&](std::size_t, CovarianceAccumulator&& partial) { acc.merge(partial); }, threads);
        done = target;
        const CovarianceReport rep = make_covariance_report(acc, table);
        rows.push_back({done, rep.rms_ee, rep.rms_en, rep.rms_mm, rep.rms_em,
                        std::max(rep.max_nn, rep.max_nm)});
    }
    return rows;
}

// Least-squares slope of log10(rms) against log10(runs).
inline double loglog_slope(const std::vector<RmsRow>& rows,
                           double RmsRow::* field = &RmsRow::rms_ee) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(rows.size());
    for (const auto& r : rows) {
        const double x = std::log10(static_cast<double>(r.runs));
        const double y = std::log10(r.*field);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace esle
