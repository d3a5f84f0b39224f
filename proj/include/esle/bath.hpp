#pragma once

#include <cmath>
#include <cstddef>

#include "esle/errors.hpp"

namespace esle {

// Bath and thermodynamic parameters. Everything downstream (correlation
// kernels, filters, noise) is a function of these four numbers. Units follow
// the convention Delta = 1: omega_c in units of Delta, beta in Delta^-1.
struct BathSpec {
    double alpha = 0.0;   // dimensionless coupling strength, >= 0
    double omega_c = 1.0; // spectral density cutoff, > 0
    double beta = 1.0;    // inverse temperature, > 0
    double hbar = 1.0;

    void validate() const {
        if (!(alpha >= 0.0)) throw DomainError("BathSpec: alpha must be >= 0");
        if (!(omega_c > 0.0)) throw DomainError("BathSpec: omega_c must be > 0");
        if (!(beta > 0.0)) throw DomainError("BathSpec: beta must be > 0");
        if (!(hbar > 0.0)) throw DomainError("BathSpec: hbar must be > 0");
    }

    // length of the imaginary-time domain
    double beta_hbar() const { return beta * hbar; }
};

// Discretization of the two time domains: t_i = t0 + i*dt (i = 0..N) and
// tau_j = j*dtau (j = 0..M), with M*dtau = beta*hbar.
struct TimeGrids {
    double t0 = 0.0;
    double dt = 0.0;
    std::size_t n_steps = 0; // N
    double dtau = 0.0;
    std::size_t m_steps = 0; // M

    static TimeGrids make(double t0, double dt, std::size_t n_steps,
                          std::size_t m_steps, const BathSpec& spec) {
        spec.validate();
        if (!(dt > 0.0)) throw ConfigError("TimeGrids: dt must be > 0");
        if (n_steps < 1) throw ConfigError("TimeGrids: n_steps must be >= 1");
        if (m_steps < 1) throw ConfigError("TimeGrids: m_steps must be >= 1");
        TimeGrids g;
        g.t0 = t0;
        g.dt = dt;
        g.n_steps = n_steps;
        g.m_steps = m_steps;
        g.dtau = spec.beta_hbar() / static_cast<double>(m_steps);
        return g;
    }

    void validate(const BathSpec& spec) const {
        if (!(dt > 0.0) || !(dtau > 0.0) || n_steps < 1 || m_steps < 1)
            throw ConfigError("TimeGrids: invalid grid parameters");
        const double len = static_cast<double>(m_steps) * dtau;
        const double target = spec.beta_hbar();
        if (std::abs(len - target) > 1e-12 * target)
            throw ConfigError("TimeGrids: m_steps*dtau does not equal beta*hbar");
    }

    double t(std::size_t i) const { return t0 + static_cast<double>(i) * dt; }
    // elapsed real time since the start of the evolution; this is the
    // argument entering the stationary kernels and the cross-time kernel
    double elapsed(std::size_t i) const { return static_cast<double>(i) * dt; }
    double tau(std::size_t j) const { return static_cast<double>(j) * dtau; }
    std::size_t n_points() const { return n_steps + 1; }
    std::size_t m_points() const { return m_steps + 1; }
};

} // namespace esle
