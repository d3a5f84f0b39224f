#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "esle/bath.hpp"
#include "esle/dynamics.hpp"
#include "esle/errors.hpp"

namespace esle {

// Full simulation configuration as parsed from a key = value file.
struct RunConfig {
    EvolutionMode mode = EvolutionMode::ESLE;
    DriveProtocol protocol;
    BathSpec bath;
    double dt = 0.0;
    std::size_t n_steps = 0;
    std::size_t m_steps = 0;
    std::size_t runs = 0;
    std::uint64_t seed = 1;
    std::size_t report_stride = 1;
    bool per_trajectory_norm = false;
    std::size_t checkpoint_every = 0;
    std::size_t matched_runs = 0;
    std::string output_dir = ".";
    unsigned threads = 0;
    double table_rel_stationary = 1e-8;
    double table_rel_cross = 1e-6;
    std::vector<double> tau_slices;
    std::vector<std::size_t> rms_run_counts = {1000, 10000, 100000};

    TimeGrids grids() const { return TimeGrids::make(protocol.t0, dt, n_steps, m_steps, bath); }

    void validate() const {
        bath.validate();
        protocol.validate();
        grids().validate(bath);
        if (runs == 0) throw ConfigError("config: runs must be >= 1");
        if (report_stride == 0 || n_steps % report_stride != 0)
            throw ConfigError("config: report_stride must divide n_steps");
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

inline double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (...) {
        throw ConfigError("config: key '" + key + "' has non-numeric value '" + v + "'");
    }
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        unsigned long long x = std::stoull(v, &pos, 0);
        if (pos != v.size()) throw std::invalid_argument(v);
        return static_cast<std::uint64_t>(x);
    } catch (...) {
        throw ConfigError("config: key '" + key + "' has non-integer value '" + v + "'");
    }
}

inline const char* kRequiredKeys[] = {"mode", "protocol", "delta",  "alpha", "omega_c",
                                      "beta", "dt",       "n_steps", "m_steps", "runs", "seed"};

} // namespace detail

inline RunConfig parse_config_text(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: line " + std::to_string(lineno) + " is not 'key = value'");
        std::string key = detail::trim(line.substr(0, eq));
        std::string val = detail::trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("config: empty key on line " + std::to_string(lineno));
        if (kv.count(key)) throw ConfigError("config: duplicate key '" + key + "'");
        kv[key] = val;
    }

    std::vector<std::string> missing;
    for (const char* k : detail::kRequiredKeys)
        if (!kv.count(k)) missing.push_back(k);
    if (!missing.empty()) {
        std::string msg = "config: missing required keys:";
        for (const auto& k : missing) msg += " " + k;
        throw ConfigError(msg);
    }

    const std::set<std::string> known = {
        "mode",           "protocol",       "delta",        "kappa",
        "epsilon0",       "t0",             "alpha",        "omega_c",
        "beta",           "hbar",           "dt",           "n_steps",
        "m_steps",        "runs",           "seed",         "report_stride",
        "normalization",  "checkpoint_every", "matched_runs", "output_dir",
        "threads",        "table_rel_stationary", "table_rel_cross",
        "tau_slices",     "rms_run_counts"};
    for (const auto& [k, v] : kv)
        if (!known.count(k)) throw ConfigError("config: unknown key '" + k + "'");

    RunConfig c;
    {
        const std::string m = kv["mode"];
        if (m == "esle") c.mode = EvolutionMode::ESLE;
        else if (m == "sle_lz") c.mode = EvolutionMode::SLE_LZ;
        else if (m == "sle_matched") c.mode = EvolutionMode::SLE_MATCHED;
        else if (m == "sle_partitioned") c.mode = EvolutionMode::SLE_PARTITIONED;
        else throw ConfigError("config: mode must be esle|sle_lz|sle_matched|sle_partitioned");
    }
    {
        const std::string p = kv["protocol"];
        if (p == "constant") c.protocol.kind = ProtocolKind::Constant;
        else if (p == "linear") c.protocol.kind = ProtocolKind::Linear;
        else throw ConfigError("config: protocol must be constant|linear");
    }
    c.protocol.delta = detail::parse_double("delta", kv["delta"]);
    c.protocol.t0 = kv.count("t0") ? detail::parse_double("t0", kv["t0"]) : 0.0;
    if (c.protocol.kind == ProtocolKind::Linear) {
        if (!kv.count("kappa")) throw ConfigError("config: linear protocol requires kappa");
        c.protocol.kappa = detail::parse_double("kappa", kv["kappa"]);
        c.protocol.epsilon0 = kv.count("epsilon0")
                                  ? detail::parse_double("epsilon0", kv["epsilon0"])
                                  : c.protocol.kappa * c.protocol.t0;
    } else {
        if (!kv.count("epsilon0")) throw ConfigError("config: constant protocol requires epsilon0");
        c.protocol.epsilon0 = detail::parse_double("epsilon0", kv["epsilon0"]);
        if (kv.count("kappa")) throw ConfigError("config: kappa is only valid for the linear protocol");
    }
    c.bath.alpha = detail::parse_double("alpha", kv["alpha"]);
    c.bath.omega_c = detail::parse_double("omega_c", kv["omega_c"]);
    c.bath.beta = detail::parse_double("beta", kv["beta"]);
    c.bath.hbar = kv.count("hbar") ? detail::parse_double("hbar", kv["hbar"]) : 1.0;
    c.dt = detail::parse_double("dt", kv["dt"]);
    c.n_steps = detail::parse_u64("n_steps", kv["n_steps"]);
    c.m_steps = detail::parse_u64("m_steps", kv["m_steps"]);
    c.runs = detail::parse_u64("runs", kv["runs"]);
    c.seed = detail::parse_u64("seed", kv["seed"]);
    if (kv.count("report_stride")) c.report_stride = detail::parse_u64("report_stride", kv["report_stride"]);
    if (kv.count("normalization")) {
        const std::string n = kv["normalization"];
        if (n == "ensemble") c.per_trajectory_norm = false;
        else if (n == "trajectory") c.per_trajectory_norm = true;
        else throw ConfigError("config: normalization must be ensemble|trajectory");
    }
    if (kv.count("checkpoint_every")) c.checkpoint_every = detail::parse_u64("checkpoint_every", kv["checkpoint_every"]);
    if (kv.count("matched_runs")) c.matched_runs = detail::parse_u64("matched_runs", kv["matched_runs"]);
    if (kv.count("output_dir")) c.output_dir = kv["output_dir"];
    if (kv.count("threads")) c.threads = static_cast<unsigned>(detail::parse_u64("threads", kv["threads"]));
    if (kv.count("table_rel_stationary"))
        c.table_rel_stationary = detail::parse_double("table_rel_stationary", kv["table_rel_stationary"]);
    if (kv.count("table_rel_cross"))
        c.table_rel_cross = detail::parse_double("table_rel_cross", kv["table_rel_cross"]);
    auto parse_list = [](const std::string& key, const std::string& v) {
        std::vector<std::string> items;
        std::string cur;
        for (char ch : v) {
            if (ch == ',') { items.push_back(detail::trim(cur)); cur.clear(); }
            else cur += ch;
        }
        cur = detail::trim(cur);
        if (!cur.empty()) items.push_back(cur);
        (void)key;
        return items;
    };
    if (kv.count("tau_slices")) {
        c.tau_slices.clear();
        for (const auto& s : parse_list("tau_slices", kv["tau_slices"]))
            c.tau_slices.push_back(detail::parse_double("tau_slices", s));
    }
    if (kv.count("rms_run_counts")) {
        c.rms_run_counts.clear();
        for (const auto& s : parse_list("rms_run_counts", kv["rms_run_counts"]))
            c.rms_run_counts.push_back(detail::parse_u64("rms_run_counts", s));
        if (c.rms_run_counts.empty()) throw ConfigError("config: rms_run_counts must not be empty");
        if (!std::is_sorted(c.rms_run_counts.begin(), c.rms_run_counts.end()))
            throw ConfigError("config: rms_run_counts must be increasing");
    }

    c.validate();
    return c;
}

inline RunConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

// Stable digest of the physics-affecting fields (FNV-1a 64 over a canonical
// text serialization). Output locations, thread counts and checkpoint cadence
// are deliberately excluded; everything that changes results is included.
inline std::uint64_t config_hash(const RunConfig& c) {
    char buf[64];
    std::string s;
    auto add = [&](const char* key, const std::string& v) {
        s += key;
        s += '=';
        s += v;
        s += ';';
    };
    auto addf = [&](const char* key, double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        add(key, buf);
    };
    auto addu = [&](const char* key, std::uint64_t v) {
        std::snprintf(buf, sizeof buf, "%llu", static_cast<unsigned long long>(v));
        add(key, buf);
    };
    add("mode", mode_name(c.mode));
    add("protocol", c.protocol.kind == ProtocolKind::Linear ? "linear" : "constant");
    addf("delta", c.protocol.delta);
    addf("kappa", c.protocol.kappa);
    addf("epsilon0", c.protocol.epsilon0);
    addf("t0", c.protocol.t0);
    addf("alpha", c.bath.alpha);
    addf("omega_c", c.bath.omega_c);
    addf("beta", c.bath.beta);
    addf("hbar", c.bath.hbar);
    addf("dt", c.dt);
    addu("n_steps", c.n_steps);
    addu("m_steps", c.m_steps);
    addu("runs", c.runs);
    addu("seed", c.seed);
    addu("report_stride", c.report_stride);
    add("normalization", c.per_trajectory_norm ? "trajectory" : "ensemble");
    addu("matched_runs", c.matched_runs);
    addf("table_rel_stationary", c.table_rel_stationary);
    addf("table_rel_cross", c.table_rel_cross);
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001B3ull;
    }
    return h;
}

} // namespace esle
