#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "esle/errors.hpp"

namespace esle::quad {

// n-point Gauss-Legendre rule on [-1, 1]. Nodes by Newton iteration on the
// Legendre recurrence; accurate to machine precision for the orders used here.
struct GaussLegendre {
    std::vector<double> x;
    std::vector<double> w;

    explicit GaussLegendre(int n) : x(n), w(n) {
        for (int i = 0; i < (n + 1) / 2; ++i) {
            double xi = std::cos(M_PI * (i + 0.75) / (n + 0.5));
            double dp = 0.0;
            for (int iter = 0; iter < 100; ++iter) {
                double p0 = 1.0, p1 = xi;
                for (int k = 2; k <= n; ++k) {
                    double p2 = ((2.0 * k - 1.0) * xi * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (xi * p1 - p0) / (xi * xi - 1.0);
                double dx = -p1 / dp;
                xi += dx;
                if (std::abs(dx) < 1e-16) break;
            }
            x[i] = -xi;
            x[n - 1 - i] = xi;
            w[i] = w[n - 1 - i] = 2.0 / ((1.0 - xi * xi) * dp * dp);
        }
    }

    static const GaussLegendre& order16() {
        static const GaussLegendre g(16);
        return g;
    }
};

// Plan for a composite rule over [0, omega_max]. Panel widths track three
// scales: the integrand shape near the origin (set by scale0), relative
// growth away from it, and the total phase-plus-decay rate per unit omega
// (rate = osc_rate + exp_rate), held below ~5 rad per panel so that 16-point
// Gauss-Legendre resolves each panel to near machine precision.
struct PanelPlan {
    std::vector<double> edges;

    PanelPlan(double omega_max, double scale0, double rate, double refine = 1.0) {
        const double cap = 5.0;
        edges.push_back(0.0);
        double w_min = omega_max * 1e-9;
        while (edges.back() < omega_max) {
            double om = edges.back();
            double w = std::max(scale0 / 3.0, 0.35 * om);
            if (rate > 0.0) w = std::min(w, cap / rate);
            w = std::max(w / refine, w_min);
            double next = om + w;
            if (next >= omega_max * (1.0 - 1e-12)) next = omega_max;
            edges.push_back(next);
        }
    }
};

// Composite Gauss-Legendre over the planned panels.
template <class F>
std::complex<double> integrate_panels(F&& f, const PanelPlan& plan) {
    const auto& gl = GaussLegendre::order16();
    std::complex<double> acc(0.0, 0.0);
    for (std::size_t p = 0; p + 1 < plan.edges.size(); ++p) {
        const double a = plan.edges[p];
        const double b = plan.edges[p + 1];
        const double h = 0.5 * (b - a);
        const double c = 0.5 * (b + a);
        std::complex<double> s(0.0, 0.0);
        for (std::size_t q = 0; q < gl.x.size(); ++q)
            s += gl.w[q] * f(c + h * gl.x[q]);
        acc += h * s;
    }
    return acc;
}

// Bound on |∫_Ω^∞ I(ω) e^{-ω g} e^{±iωt} dω| for the Ohmic density
// I(ω) = α ω (1+(ω/ω_c)²)^{-2} ≤ α ω_c⁴ / ω³, with an optional bounded
// thermal prefactor folded into `env_factor`. Two estimates are combined:
//   pure power tail:          ∫_Ω^∞ α ω_c⁴ ω^{-3} dω = α ω_c⁴ / (2 Ω²)
//   integration by parts:     ≤ 2 I(Ω) e^{-Ω g} / |g + it|
struct TailParams {
    double alpha = 0.0;
    double omega_c = 1.0;
    double env_factor = 1.0; // sup of any extra bounded prefactor beyond Omega
    double exp_rate = 0.0;   // g >= 0
    double osc_rate = 0.0;   // t >= 0
};

inline double tail_bound(double omega, const TailParams& tp) {
    const double wc4 = tp.omega_c * tp.omega_c * tp.omega_c * tp.omega_c;
    const double power = tp.env_factor * tp.alpha * wc4 / (2.0 * omega * omega);
    const double r = std::hypot(tp.exp_rate, tp.osc_rate);
    if (r <= 0.0) return power;
    const double i_env = tp.env_factor * tp.alpha * wc4 / (omega * omega * omega);
    const double damp = std::exp(-omega * tp.exp_rate);
    return std::min(power, 2.0 * i_env * damp / r);
}

// Smallest Omega (by doubling from omega_min) whose tail bound meets tol.
inline double choose_omega_max(double omega_min, const TailParams& tp, double tol_abs) {
    double omega = omega_min;
    for (int k = 0; k < 64; ++k) {
        if (tail_bound(omega, tp) <= tol_abs) return omega;
        omega *= 2.0;
    }
    throw QuadratureError("quadrature: tail bound did not reach tolerance");
}

// Integrate f over [0, ∞) to absolute tolerance tol_abs. `scale0` is the
// shape scale of the integrand near the origin; osc/exp rates as above.
// With `check_convergence`, the result is validated against a panel-doubled
// evaluation and a QuadratureError is raised if the two disagree.
template <class F>
std::complex<double> integrate_half_line(F&& f, double omega_min, const TailParams& tp,
                                         double scale0, double tol_abs,
                                         bool check_convergence = false,
                                         double check_rel = 1e-9) {
    const double omega_max = choose_omega_max(omega_min, tp, 0.5 * tol_abs);
    const double rate = tp.osc_rate + tp.exp_rate;
    PanelPlan plan(omega_max, scale0, rate);
    std::complex<double> v = integrate_panels(f, plan);
    if (check_convergence) {
        PanelPlan fine(omega_max, scale0, rate, 2.0);
        std::complex<double> v2 = integrate_panels(f, fine);
        const double ref = std::max({std::abs(v2), tol_abs});
        if (std::abs(v - v2) > std::max(check_rel * ref, 0.5 * tol_abs))
            throw QuadratureError("quadrature: panel doubling did not converge");
        v = v2;
    }
    return v;
}

} // namespace esle::quad
