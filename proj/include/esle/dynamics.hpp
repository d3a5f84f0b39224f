#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "esle/bath.hpp"
#include "esle/errors.hpp"
#include "esle/pauli.hpp"

namespace esle {

enum class ProtocolKind { Constant, Linear };

// Bias drive epsilon(t) and tunneling element of the two-level Hamiltonian
// H(t) = epsilon(t) sigma_z + delta sigma_x.
struct DriveProtocol {
    ProtocolKind kind = ProtocolKind::Constant;
    double delta = 1.0;
    double epsilon0 = 0.0; // bias at t0
    double kappa = 0.0;    // sweep rate (linear only)
    double t0 = 0.0;

    double epsilon(double t) const {
        return kind == ProtocolKind::Linear ? kappa * t : epsilon0;
    }

    void validate() const {
        if (!(delta > 0.0)) throw ConfigError("DriveProtocol: delta must be > 0");
        if (kind == ProtocolKind::Linear) {
            if (kappa < 0.0) throw ConfigError("DriveProtocol: kappa must be >= 0");
            const double want = kappa * t0;
            const double scale = std::max({std::abs(want), std::abs(epsilon0), 1.0});
            if (std::abs(epsilon0 - want) > 1e-9 * scale)
                throw ConfigError("DriveProtocol: linear protocol requires epsilon0 = kappa*t0");
        }
    }
};

enum class EvolutionMode { ESLE, SLE_LZ, SLE_MATCHED, SLE_PARTITIONED };

inline const char* mode_name(EvolutionMode m) {
    switch (m) {
        case EvolutionMode::ESLE: return "esle";
        case EvolutionMode::SLE_LZ: return "sle_lz";
        case EvolutionMode::SLE_MATCHED: return "sle_matched";
        case EvolutionMode::SLE_PARTITIONED: return "sle_partitioned";
    }
    return "?";
}

constexpr double kDivergenceCap = 1e6;

// Imaginary-time thermalization: M explicit Euler steps of
//   -hbar d_tau rho = [eps(t0) sigma_z + delta sigma_x - mu(tau) sigma_z] rho
// from rho(0) = 1. Left multiplication only; the endpoint is returned
// unnormalized (normalization policy lives with the ensemble).
inline Mat2 evolve_imaginary(std::span<const cplx> mu, const DriveProtocol& protocol,
                             const TimeGrids& grids, double hbar) {
    if (mu.size() < grids.m_steps)
        throw ConfigError("evolve_imaginary: mu vector shorter than the tau grid");
    const double h = grids.dtau / hbar;
    const double eps = protocol.epsilon(protocol.t0);
    const double delta = protocol.delta;
    Mat2 rho = Mat2::identity();
    for (std::size_t j = 0; j < grids.m_steps; ++j) {
        const cplx cz = eps - mu[j]; // coefficient of sigma_z rho
        const cplx r11 = rho.a11, r12 = rho.a12, r21 = rho.a21, r22 = rho.a22;
        rho.a11 -= h * (cz * r11 + delta * r21);
        rho.a12 -= h * (cz * r12 + delta * r22);
        rho.a21 -= h * (-cz * r21 + delta * r11);
        rho.a22 -= h * (-cz * r22 + delta * r12);
        if ((j & 15u) == 15u || j + 1 == grids.m_steps) {
            if (!rho.finite() || rho.max_abs() > kDivergenceCap)
                throw TrajectoryDiverged("imaginary-time trajectory diverged", j);
        }
    }
    return rho;
}

// Real-time propagation: N explicit Euler steps of
//   i hbar d_t rho = [H(t), rho] - eta(t) [sigma_z, rho] - (hbar/2) nu(t) {sigma_z, rho}
// with H(t) = eps(t) sigma_z + delta sigma_x, eps evaluated at the left
// endpoint of each step. The observer receives (index, rho) for every grid
// point 0..N.
template <class Observer>
inline void evolve_real(Mat2 rho, std::span<const cplx> eta, std::span<const cplx> nu,
                        const DriveProtocol& protocol, const TimeGrids& grids, double hbar,
                        Observer&& observe) {
    if (eta.size() < grids.n_steps || nu.size() < grids.n_steps)
        throw ConfigError("evolve_real: noise vectors shorter than the time grid");
    const double dt = grids.dt;
    const double delta = protocol.delta;
    const cplx s(0.0, -dt / hbar); // dt/(i hbar)
    observe(std::size_t{0}, rho);
    for (std::size_t i = 0; i < grids.n_steps; ++i) {
        const double eps = protocol.epsilon(grids.t(i));
        const cplx ce = eps - eta[i];
        const cplx cv = 0.5 * hbar * nu[i];
        const cplx r11 = rho.a11, r12 = rho.a12, r21 = rho.a21, r22 = rho.a22;
        // commutators: [sigma_z,rho] = [[0, 2 r12],[-2 r21, 0]],
        // [sigma_x,rho] = [[r21-r12, r22-r11],[r11-r22, r12-r21]],
        // anticommutator {sigma_z,rho} = [[2 r11, 0],[0, -2 r22]]
        rho.a11 += s * (delta * (r21 - r12) - cv * (2.0 * r11));
        rho.a12 += s * (ce * (2.0 * r12) + delta * (r22 - r11));
        rho.a21 += s * (-ce * (2.0 * r21) + delta * (r11 - r22));
        rho.a22 += s * (delta * (r12 - r21) + cv * (2.0 * r22));
        if ((i & 15u) == 15u || i + 1 == grids.n_steps) {
            if (!rho.finite() || rho.max_abs() > kDivergenceCap)
                throw TrajectoryDiverged("real-time trajectory diverged", i);
        }
        observe(i + 1, rho);
    }
}

// Initial state for the partitioned (SLE) modes. The ESLE mode has no single
// initial condition: each trajectory starts from its own imaginary-time
// endpoint.
inline Mat2 initial_condition(EvolutionMode mode, const std::optional<Mat2>& matched_rho,
                              const DriveProtocol& protocol, const BathSpec& spec) {
    switch (mode) {
        case EvolutionMode::SLE_LZ:
            if (matched_rho) throw ConfigError("initial_condition: matched_rho only valid for SLE_MATCHED");
            return {cplx(1.0), cplx(0.0), cplx(0.0), cplx(0.0)};
        case EvolutionMode::SLE_MATCHED:
            if (!matched_rho) throw ConfigError("initial_condition: SLE_MATCHED requires matched_rho");
            return *matched_rho;
        case EvolutionMode::SLE_PARTITIONED:
            if (matched_rho) throw ConfigError("initial_condition: matched_rho only valid for SLE_MATCHED");
            return gibbs_state(protocol.epsilon(protocol.t0), protocol.delta, spec.beta);
        case EvolutionMode::ESLE:
            throw ConfigError("initial_condition: ESLE trajectories use their own imaginary-time endpoints");
    }
    throw ConfigError("initial_condition: unknown mode");
}

// Ideal asymptotic Landau-Zener survival probability exp(-pi delta^2/(hbar kappa)).
inline double lz_survival_probability(double delta, double kappa, double hbar = 1.0) {
    if (!(kappa > 0.0)) throw DomainError("lz_survival_probability: kappa must be > 0");
    if (!(hbar > 0.0)) throw DomainError("lz_survival_probability: hbar must be > 0");
    return std::exp(-M_PI * delta * delta / (hbar * kappa));
}

// Bath-renormalized tunneling element delta*(delta/omega_c)^(alpha/(1-alpha));
// report-scaling only.
inline double renormalized_tunneling(double delta, double alpha, double omega_c) {
    if (!(alpha >= 0.0) || alpha >= 1.0)
        throw DomainError("renormalized_tunneling: requires 0 <= alpha < 1");
    if (!(omega_c > delta)) throw DomainError("renormalized_tunneling: requires omega_c > delta");
    return delta * std::pow(delta / omega_c, alpha / (1.0 - alpha));
}

// Noise-free reference integrator: per-step exact 2x2 exponential of the
// instantaneous Hamiltonian with midpoint-evaluated bias. Used as the
// brute-force oracle for zero-coupling checks.
template <class Observer>
inline void unitary_oracle(Mat2 rho, const DriveProtocol& protocol, const TimeGrids& grids,
                           double hbar, Observer&& observe) {
    observe(std::size_t{0}, rho);
    for (std::size_t i = 0; i < grids.n_steps; ++i) {
        const double tm = grids.t(i) + 0.5 * grids.dt;
        const double eps = protocol.epsilon(tm);
        const double r = std::hypot(eps, protocol.delta);
        const Mat2 u = rotation(eps, protocol.delta, grids.dt * r / hbar);
        rho = matmul(u, matmul(rho, u.dagger()));
        observe(i + 1, rho);
    }
}

} // namespace esle
