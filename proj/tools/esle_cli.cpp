// Command-line front end: simulation runs, noise verification, kernel dumps.

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "esle/covariance_study.hpp"
#include "esle/esle.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliOverrides {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> runs;
    std::optional<std::string> output;
    std::string resume;
};

esle::RunConfig load_config(const CliOverrides& cli) {
    esle::RunConfig cfg = esle::parse_config(cli.config_path);
    if (const char* env = std::getenv("ESLE_SEED")) cfg.seed = std::strtoull(env, nullptr, 0);
    if (cli.seed) cfg.seed = *cli.seed;
    if (cli.runs) cfg.runs = *cli.runs;
    if (cli.output) cfg.output_dir = *cli.output;
    cfg.validate();
    return cfg;
}

json config_echo(const esle::RunConfig& c) {
    json j;
    j["mode"] = esle::mode_name(c.mode);
    j["protocol"] = c.protocol.kind == esle::ProtocolKind::Linear ? "linear" : "constant";
    j["delta"] = c.protocol.delta;
    j["kappa"] = c.protocol.kappa;
    j["epsilon0"] = c.protocol.epsilon0;
    j["t0"] = c.protocol.t0;
    j["alpha"] = c.bath.alpha;
    j["omega_c"] = c.bath.omega_c;
    j["beta"] = c.bath.beta;
    j["hbar"] = c.bath.hbar;
    j["dt"] = c.dt;
    j["n_steps"] = c.n_steps;
    j["m_steps"] = c.m_steps;
    j["runs"] = c.runs;
    j["seed"] = c.seed;
    j["report_stride"] = c.report_stride;
    j["normalization"] = c.per_trajectory_norm ? "trajectory" : "ensemble";
    j["matched_runs"] = c.matched_runs;
    j["table_rel_stationary"] = c.table_rel_stationary;
    j["table_rel_cross"] = c.table_rel_cross;
    return j;
}

struct BuiltPhysics {
    esle::KernelTable table;
    esle::SimulationContext ctx;
    double build_seconds = 0.0;
};

BuiltPhysics build_physics(const esle::RunConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    BuiltPhysics b;
    b.ctx.spec = cfg.bath;
    b.ctx.grids = cfg.grids();
    b.ctx.protocol = cfg.protocol;
    b.ctx.config_hash = esle::config_hash(cfg);
    esle::TableAccuracy acc;
    acc.rel_stationary = cfg.table_rel_stationary;
    acc.rel_cross = cfg.table_rel_cross;
    acc.threads = cfg.threads;
    b.table = esle::build_kernel_table(cfg.bath, b.ctx.grids, acc);
    b.ctx.filters = esle::build_filters(b.table, b.ctx.grids);
    b.build_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return b;
}

// removes partial outputs when a run fails midway
class OutputGuard {
  public:
    void track(const std::string& path) { paths_.push_back(path); }
    void commit() { committed_ = true; }
    ~OutputGuard() {
        if (committed_) return;
        for (const auto& p : paths_) {
            std::error_code ec;
            fs::remove(p, ec);
        }
    }

  private:
    std::vector<std::string> paths_;
    bool committed_ = false;
};

int cmd_run(const CliOverrides& cli) {
    const esle::RunConfig cfg = load_config(cli);
    fs::create_directories(cfg.output_dir);
    OutputGuard guard;

    BuiltPhysics b = build_physics(cfg);
    esle::RunSettings st;
    st.mode = cfg.mode;
    st.seed = cfg.seed;
    st.runs = cfg.runs;
    st.report_stride = cfg.report_stride;
    st.per_trajectory_norm = cfg.per_trajectory_norm;
    st.threads = cfg.threads;
    st.matched_runs = cfg.matched_runs;
    if (cfg.checkpoint_every > 0) {
        st.checkpoint_every = cfg.checkpoint_every;
        st.checkpoint_path = (fs::path(cfg.output_dir) / "checkpoint.bin").string();
    }

    const auto start = std::chrono::steady_clock::now();
    const esle::RunResult result = esle::run_ensemble(b.ctx, st, cli.resume);
    const double run_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    const std::string series_path = (fs::path(cfg.output_dir) / "series.csv").string();
    guard.track(series_path);
    esle::io::write_series_csv(series_path, result.series, b.ctx.config_hash);

    json manifest;
    manifest["tool_version"] = esle::kVersion;
    manifest["config_hash"] = esle::io::hash_hex(b.ctx.config_hash);
    manifest["config"] = config_echo(cfg);
    manifest["trajectories"] = {{"requested", cfg.runs},
                                {"accepted", result.stats.count},
                                {"diverged", result.stats.diverged}};
    manifest["wall_time_seconds"] = {{"kernel_build", b.build_seconds}, {"ensemble", run_seconds}};
    if (result.matched_initial) {
        const auto& m = *result.matched_initial;
        manifest["matched_initial"] = {{"re_rho11", m.a11.real()}, {"re_rho22", m.a22.real()},
                                       {"re_rho12", m.a12.real()}, {"im_rho12", m.a12.imag()}};
    }
    if (cfg.protocol.kind == esle::ProtocolKind::Linear && cfg.protocol.kappa > 0.0) {
        manifest["p_lz"] =
            esle::lz_survival_probability(cfg.protocol.delta, cfg.protocol.kappa, cfg.bath.hbar);
        if (cfg.bath.alpha < 1.0 && cfg.bath.omega_c > cfg.protocol.delta)
            manifest["delta_r"] = esle::renormalized_tunneling(cfg.protocol.delta, cfg.bath.alpha,
                                                               cfg.bath.omega_c);
        // asymptote over the last quarter of the sz series
        const auto& s = result.series;
        const std::size_t n = s.t.size();
        const std::size_t start_idx = n - n / 4;
        if (n >= 4 && n - start_idx >= 20) {
            const auto fit = esle::extrapolate_asymptote(
                std::span(s.t).subspan(start_idx), std::span(s.sz_mean).subspan(start_idx));
            manifest["sz_asymptote"] = {{"value", fit.c},
                                        {"stderr", fit.c_stderr},
                                        {"model", fit.fallback ? "tail_mean" : "damped_cosine"},
                                        {"gamma", fit.gamma},
                                        {"omega", fit.omega},
                                        {"window_start", s.t[start_idx]}};
            manifest["survival_probability"] = 0.5 * (1.0 + fit.c);
        }
    }
    const std::string manifest_path = (fs::path(cfg.output_dir) / "manifest.json").string();
    guard.track(manifest_path);
    std::ofstream(manifest_path) << manifest.dump(2) << "\n";
    guard.commit();
    std::cout << "run: " << result.stats.count << " trajectories accepted, "
              << result.stats.diverged << " diverged; outputs in " << cfg.output_dir << "\n";
    return 0;
}

int cmd_verify_noise(const CliOverrides& cli) {
    const esle::RunConfig cfg = load_config(cli);
    fs::create_directories(cfg.output_dir);
    BuiltPhysics b = build_physics(cfg);

    std::vector<std::size_t> counts;
    for (std::size_t c : cfg.rms_run_counts)
        if (c <= cfg.runs) counts.push_back(c);
    if (counts.empty() || counts.back() != cfg.runs) counts.push_back(cfg.runs);

    esle::CovarianceAccumulator acc;
    const auto rows = esle::run_covariance_study(b.ctx.filters, b.table, b.ctx.grids, cfg.seed,
                                                 counts, acc, cfg.threads);

    esle::io::write_covariance_csvs(cfg.output_dir, acc, b.table, b.ctx.grids, b.ctx.config_hash);
    {
        esle::io::CsvWriter csv((fs::path(cfg.output_dir) / "rms_vs_runs.csv").string(),
                                b.ctx.config_hash,
                                "runs,rms_etaeta,rms_etanu,rms_mumu,rms_etamu,max_zero_correlator");
        for (const auto& r : rows)
            csv.row({static_cast<double>(r.runs), r.rms_ee, r.rms_en, r.rms_mm, r.rms_em, r.max_zero});
    }
    // optional tau slices of the cross-time correlator
    for (double tau : cfg.tau_slices) {
        const std::size_t j = static_cast<std::size_t>(
            std::llround(tau / b.ctx.grids.dtau));
        if (j > cfg.m_steps) continue;
        esle::io::CsvWriter csv((fs::path(cfg.output_dir) /
                                 ("cov_eta_mu_slice_" + std::to_string(j) + ".csv")).string(),
                                b.ctx.config_hash,
                                "t_or_tau_row,t_or_tau_col_or_slice,re_target,im_target,re_sample,im_sample");
        const double inv = 1.0 / static_cast<double>(acc.count);
        for (std::size_t i = 0; i <= cfg.n_steps; ++i) {
            const esle::cplx tgt = b.table.eta_mu_at(i, j);
            const esle::cplx smp = acc.em[i * (cfg.m_steps + 1) + j] * inv;
            csv.row({b.ctx.grids.elapsed(i), b.ctx.grids.tau(j), tgt.real(), tgt.imag(),
                     smp.real(), smp.imag()});
        }
    }
    const auto rep = esle::make_covariance_report(acc, b.table);
    std::cout << "verify-noise: runs=" << rep.runs << " K0=" << rep.k0
              << " rms_etaeta=" << rep.rms_ee << " max_zero=" << std::max(rep.max_nn, rep.max_nm)
              << " slope=" << esle::loglog_slope(rows) << "\n";
    return 0;
}

int cmd_kernels(const CliOverrides& cli) {
    const esle::RunConfig cfg = load_config(cli);
    fs::create_directories(cfg.output_dir);
    BuiltPhysics b = build_physics(cfg);
    esle::io::write_kernel_dumps(cfg.output_dir, b.table, b.ctx.grids, b.ctx.config_hash);
    esle::io::write_filter_diagnostics((fs::path(cfg.output_dir) / "filter_diagnostics.csv").string(),
                                       b.ctx.filters, b.ctx.config_hash);
    std::cout << "kernels: tables and filter diagnostics written to " << cfg.output_dir << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stochastic simulator for the driven spin-boson model with "
                 "correlated thermal initial conditions"};
    app.require_subcommand(1);

    CliOverrides cli;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", cli.config_path, "configuration file")->required();
        sub->add_option("--seed", cli.seed, "override the RNG seed (also: ESLE_SEED)");
        sub->add_option("--runs", cli.runs, "override the trajectory count");
        sub->add_option("--output", cli.output, "override the output directory");
    };
    CLI::App* run = app.add_subcommand("run", "run a simulation and write series.csv + manifest.json");
    add_common(run);
    run->add_option("--resume", cli.resume, "resume from a checkpoint file");
    CLI::App* verify = app.add_subcommand("verify-noise", "noise covariance verification study");
    add_common(verify);
    CLI::App* kernels = app.add_subcommand("kernels", "dump kernel tables and filter diagnostics");
    add_common(kernels);

    CLI11_PARSE(app, argc, argv);
    try {
        if (run->parsed()) return cmd_run(cli);
        if (verify->parsed()) return cmd_verify_noise(cli);
        if (kernels->parsed()) return cmd_kernels(cli);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
