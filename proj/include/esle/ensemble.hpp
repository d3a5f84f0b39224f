#pragma once

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "esle/bath.hpp"
#include "esle/dynamics.hpp"
#include "esle/errors.hpp"
#include "esle/filters.hpp"
#include "esle/noise.hpp"
#include "esle/parallel.hpp"
#include "esle/stats.hpp"

namespace esle {

// Trajectories are processed in fixed shards; shard partials are merged in
// shard order, which makes results independent of the worker count and lets
// checkpoints cut the run at exact shard boundaries.
constexpr std::size_t kShardSize = 64;

struct RunSettings {
    EvolutionMode mode = EvolutionMode::ESLE;
    std::uint64_t seed = 1;
    std::size_t runs = 1000;
    std::size_t report_stride = 1;
    bool per_trajectory_norm = false;
    double max_diverged_fraction = 0.05;
    unsigned threads = 0;
    std::size_t checkpoint_every = 0; // trajectories; 0 disables
    std::string checkpoint_path;
    std::size_t matched_runs = 0; // phase-1 trajectories for SLE_MATCHED; 0 = runs
    // process at most this many new trajectories in this call, then write a
    // checkpoint and return (0 = run to completion); requires checkpoint_path
    std::size_t stop_after = 0;
};

struct SimulationContext {
    BathSpec spec;
    TimeGrids grids;
    DriveProtocol protocol;
    FilterSet filters;
    std::uint64_t config_hash = 0;
};

struct RunResult {
    EnsembleStats stats;
    ObservableSeries series;
    std::optional<Mat2> matched_initial;
};

namespace detail {

inline std::vector<double> report_times(const TimeGrids& grids, std::size_t stride) {
    std::vector<double> t;
    for (std::size_t i = 0; i <= grids.n_steps; i += stride) t.push_back(grids.t(i));
    return t;
}

inline std::size_t report_points(const TimeGrids& grids, std::size_t stride) {
    return grids.n_steps / stride + 1;
}

} // namespace detail

// ---- checkpointing ---------------------------------------------------------
//
// Binary layout (all integers u64 little-endian, doubles raw IEEE-754):
//   magic "ESLECKP1" | config_hash | n_report | stride | runs_total
//   | count | diverged | next_trajectory | data_len | data...
// The file captures the merged prefix [0, next_trajectory) of the shard
// sequence, so resuming reproduces a straight-through run bit for bit.

struct Checkpoint {
    std::uint64_t config_hash = 0;
    std::uint64_t n_report = 0;
    std::uint64_t stride = 0;
    std::uint64_t runs_total = 0;
    std::uint64_t next_trajectory = 0;
    EnsembleStats stats;
};

inline void write_checkpoint(const std::string& path, const Checkpoint& ck) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw CheckpointError("checkpoint: cannot open " + tmp);
        const char magic[8] = {'E', 'S', 'L', 'E', 'C', 'K', 'P', '1'};
        out.write(magic, 8);
        auto w64 = [&](std::uint64_t v) { out.write(reinterpret_cast<const char*>(&v), 8); };
        w64(ck.config_hash);
        w64(ck.n_report);
        w64(ck.stride);
        w64(ck.runs_total);
        w64(ck.stats.count);
        w64(ck.stats.diverged);
        w64(ck.next_trajectory);
        w64(ck.stats.data.size());
        out.write(reinterpret_cast<const char*>(ck.stats.data.data()),
                  static_cast<std::streamsize>(ck.stats.data.size() * sizeof(double)));
        if (!out) throw CheckpointError("checkpoint: write failed for " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

inline Checkpoint read_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError("checkpoint: cannot open " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, "ESLECKP1", 8) != 0)
        throw CheckpointError("checkpoint: bad magic in " + path);
    auto r64 = [&]() {
        std::uint64_t v = 0;
        in.read(reinterpret_cast<char*>(&v), 8);
        return v;
    };
    Checkpoint ck;
    ck.config_hash = r64();
    ck.n_report = r64();
    ck.stride = r64();
    ck.runs_total = r64();
    const std::uint64_t count = r64();
    const std::uint64_t diverged = r64();
    ck.next_trajectory = r64();
    const std::uint64_t len = r64();
    ck.stats.init(ck.config_hash, ck.n_report);
    if (len != ck.stats.data.size())
        throw CheckpointError("checkpoint: data length mismatch in " + path);
    in.read(reinterpret_cast<char*>(ck.stats.data.data()),
            static_cast<std::streamsize>(len * sizeof(double)));
    if (!in) throw CheckpointError("checkpoint: truncated file " + path);
    ck.stats.count = count;
    ck.stats.diverged = diverged;
    if (ck.next_trajectory % kShardSize != 0 && ck.next_trajectory != ck.runs_total)
        throw CheckpointError("checkpoint: frontier not on a shard boundary");
    return ck;
}

// ---- ensemble drivers ------------------------------------------------------

// Phase 1 of SLE_MATCHED: average of the imaginary-time endpoints over its
// own trajectory set (hermitized and normalized to unit trace).
inline Mat2 compute_matched_initial(const SimulationContext& ctx, const RunSettings& st) {
    const std::size_t runs = st.matched_runs > 0 ? st.matched_runs : st.runs;
    const WhiteLayout layout = WhiteLayout::of(ctx.filters);
    struct Partial {
        Mat2 sum;
        std::size_t n = 0;
        std::size_t bad = 0;
    };
    Partial total;
    sharded_reduce<Partial>(
        runs, kShardSize,
        [&](std::size_t, std::size_t begin, std::size_t end) {
            Partial p;
            WhiteDraw w;
            NoiseWorkspace ws;
            NoiseRealization noise;
            for (std::size_t r = begin; r < end; ++r) {
                draw_whites(st.seed, r, ctx.grids, layout, w, true);
                synthesize(ctx.filters, w, ctx.grids, ws, noise, false);
                try {
                    p.sum += evolve_imaginary(noise.mu, ctx.protocol, ctx.grids, ctx.spec.hbar);
                    ++p.n;
                } catch (const TrajectoryDiverged&) {
                    ++p.bad;
                }
            }
            return p;
        },
        [&](std::size_t, Partial&& p) {
            total.sum += p.sum;
            total.n += p.n;
            total.bad += p.bad;
        },
        st.threads);
    if (total.n == 0) throw EnsembleError("matched initialization: all trajectories diverged");
    Mat2 avg = (cplx(1.0 / static_cast<double>(total.n), 0.0)) * total.sum;
    // hermitize and normalize
    Mat2 herm{cplx(avg.a11.real(), 0.0), 0.5 * (avg.a12 + std::conj(avg.a21)),
              cplx(0.0, 0.0), cplx(avg.a22.real(), 0.0)};
    herm.a21 = std::conj(herm.a12);
    const double tr = herm.a11.real() + herm.a22.real();
    if (tr == 0.0) throw EnsembleError("matched initialization: zero-trace average");
    herm *= 1.0 / tr;
    return herm;
}

inline RunResult run_ensemble(const SimulationContext& ctx, const RunSettings& st,
                              const std::string& resume_path = "") {
    ctx.spec.validate();
    ctx.grids.validate(ctx.spec);
    ctx.protocol.validate();
    if (st.runs == 0) throw ConfigError("run_ensemble: runs must be >= 1");
    if (st.report_stride == 0 || ctx.grids.n_steps % st.report_stride != 0)
        throw ConfigError("run_ensemble: report_stride must divide n_steps");

    const std::size_t n_report = detail::report_points(ctx.grids, st.report_stride);
    const WhiteLayout layout = WhiteLayout::of(ctx.filters);
    const bool is_esle = st.mode == EvolutionMode::ESLE;

    RunResult result;
    std::optional<Mat2> rho0_fixed;
    if (st.mode == EvolutionMode::SLE_MATCHED) {
        result.matched_initial = compute_matched_initial(ctx, st);
        rho0_fixed = initial_condition(st.mode, result.matched_initial, ctx.protocol, ctx.spec);
    } else if (st.mode != EvolutionMode::ESLE) {
        rho0_fixed = initial_condition(st.mode, std::nullopt, ctx.protocol, ctx.spec);
    }

    EnsembleStats merged;
    std::size_t first_trajectory = 0;
    if (!resume_path.empty()) {
        Checkpoint ck = read_checkpoint(resume_path);
        if (ck.config_hash != ctx.config_hash)
            throw CheckpointError("resume: checkpoint config hash does not match this run");
        if (ck.n_report != n_report || ck.stride != st.report_stride || ck.runs_total != st.runs)
            throw CheckpointError("resume: checkpoint grid/stride/runs do not match this run");
        merged = std::move(ck.stats);
        first_trajectory = ck.next_trajectory;
    } else {
        merged.init(ctx.config_hash, n_report);
    }

    std::size_t remaining = st.runs > first_trajectory ? st.runs - first_trajectory : 0;
    const bool partial_session = st.stop_after > 0 && st.stop_after < remaining;
    if (partial_session) {
        if (st.checkpoint_path.empty())
            throw ConfigError("run_ensemble: stop_after requires a checkpoint path");
        // stop on a shard boundary so the resumed run replays identically
        remaining = ((st.stop_after + kShardSize - 1) / kShardSize) * kShardSize;
        remaining = std::min(remaining, st.runs - first_trajectory);
    }
    std::size_t next_checkpoint =
        st.checkpoint_every > 0 ? first_trajectory + st.checkpoint_every : st.runs + 1;

    sharded_reduce<EnsembleStats>(
        remaining, kShardSize,
        [&](std::size_t, std::size_t begin, std::size_t end) {
            EnsembleStats partial;
            partial.init(ctx.config_hash, n_report);
            WhiteDraw w;
            NoiseWorkspace ws;
            NoiseRealization noise;
            for (std::size_t k = begin; k < end; ++k) {
                const std::size_t r = first_trajectory + k;
                draw_whites(st.seed, r, ctx.grids, layout, w, is_esle);
                synthesize(ctx.filters, w, ctx.grids, ws, noise, is_esle);
                try {
                    Mat2 rho0;
                    if (is_esle) {
                        rho0 = evolve_imaginary(noise.mu, ctx.protocol, ctx.grids, ctx.spec.hbar);
                        if (st.per_trajectory_norm) {
                            const cplx tr = rho0.trace();
                            if (tr == cplx(0.0, 0.0))
                                throw TrajectoryDiverged("zero trace after imaginary evolution",
                                                         ctx.grids.m_steps);
                            rho0 *= 1.0 / tr;
                        }
                    } else {
                        rho0 = *rho0_fixed;
                    }
                    evolve_real(rho0, noise.eta, noise.nu, ctx.protocol, ctx.grids, ctx.spec.hbar,
                                [&](std::size_t i, const Mat2& rho) {
                                    if (i % st.report_stride == 0)
                                        partial.add_sample(i / st.report_stride, rho);
                                });
                    partial.finish_trajectory();
                } catch (const TrajectoryDiverged&) {
                    partial.count_diverged();
                }
            }
            return partial;
        },
        [&](std::size_t shard, EnsembleStats&& partial) {
            merged.merge(partial);
            const std::size_t frontier =
                first_trajectory + std::min(remaining, (shard + 1) * kShardSize);
            if (!st.checkpoint_path.empty() && st.checkpoint_every > 0 && frontier >= next_checkpoint &&
                frontier < st.runs) {
                Checkpoint ck;
                ck.config_hash = ctx.config_hash;
                ck.n_report = n_report;
                ck.stride = st.report_stride;
                ck.runs_total = st.runs;
                ck.next_trajectory = frontier;
                ck.stats = merged;
                write_checkpoint(st.checkpoint_path, ck);
                while (next_checkpoint <= frontier) next_checkpoint += st.checkpoint_every;
            }
        },
        st.threads);

    if (merged.count == 0)
        throw EnsembleError("run_ensemble: all trajectories diverged");
    const double frac = static_cast<double>(merged.diverged) / static_cast<double>(merged.launched());
    if (frac > st.max_diverged_fraction)
        throw EnsembleError("run_ensemble: diverged fraction " + std::to_string(frac) +
                            " exceeds limit " + std::to_string(st.max_diverged_fraction));

    if (!st.checkpoint_path.empty()) {
        Checkpoint ck;
        ck.config_hash = ctx.config_hash;
        ck.n_report = n_report;
        ck.stride = st.report_stride;
        ck.runs_total = st.runs;
        ck.next_trajectory = first_trajectory + remaining;
        ck.stats = merged;
        write_checkpoint(st.checkpoint_path, ck);
    }

    const std::vector<double> times = detail::report_times(ctx.grids, st.report_stride);
    result.series = make_observable_series(merged, times);
    result.stats = std::move(merged);
    return result;
}

} // namespace esle
