#pragma once

#include <cmath>
#include <complex>

namespace esle {

using cplx = std::complex<double>;

// Complex 2x2 matrix, row-major: [[a11 a12], [a21 a22]].
struct Mat2 {
    cplx a11{}, a12{}, a21{}, a22{};

    static Mat2 identity() { return {cplx(1.0), cplx(0.0), cplx(0.0), cplx(1.0)}; }
    static Mat2 zero() { return {}; }

    cplx trace() const { return a11 + a22; }
    Mat2 dagger() const {
        return {std::conj(a11), std::conj(a21), std::conj(a12), std::conj(a22)};
    }
    double max_abs() const {
        return std::max(std::max(std::abs(a11), std::abs(a12)),
                        std::max(std::abs(a21), std::abs(a22)));
    }
    bool finite() const {
        auto ok = [](cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); };
        return ok(a11) && ok(a12) && ok(a21) && ok(a22);
    }

    Mat2& operator+=(const Mat2& o) {
        a11 += o.a11; a12 += o.a12; a21 += o.a21; a22 += o.a22;
        return *this;
    }
    Mat2& operator-=(const Mat2& o) {
        a11 -= o.a11; a12 -= o.a12; a21 -= o.a21; a22 -= o.a22;
        return *this;
    }
    Mat2& operator*=(cplx s) {
        a11 *= s; a12 *= s; a21 *= s; a22 *= s;
        return *this;
    }
};

inline Mat2 operator+(Mat2 a, const Mat2& b) { return a += b; }
inline Mat2 operator-(Mat2 a, const Mat2& b) { return a -= b; }
inline Mat2 operator*(cplx s, Mat2 a) { return a *= s; }

inline Mat2 matmul(const Mat2& a, const Mat2& b) {
    return {a.a11 * b.a11 + a.a12 * b.a21, a.a11 * b.a12 + a.a12 * b.a22,
            a.a21 * b.a11 + a.a22 * b.a21, a.a21 * b.a12 + a.a22 * b.a22};
}

inline double max_abs_diff(const Mat2& a, const Mat2& b) {
    return (a - b).max_abs();
}

// exp(-beta (eps sigma_z + delta sigma_x)) normalized to unit trace.
inline Mat2 gibbs_state(double eps, double delta, double beta) {
    const double r = std::hypot(eps, delta);
    if (r == 0.0) return {cplx(0.5), cplx(0.0), cplx(0.0), cplx(0.5)};
    const double ch = std::cosh(beta * r);
    const double sh = std::sinh(beta * r);
    Mat2 g{cplx(ch - sh * eps / r), cplx(-sh * delta / r),
           cplx(-sh * delta / r), cplx(ch + sh * eps / r)};
    const cplx z = g.trace();
    g *= 1.0 / z.real();
    return g;
}

// exp(-i theta (eps sigma_z + delta sigma_x)/r) with r = |(eps, delta)|.
inline Mat2 rotation(double eps, double delta, double theta) {
    const double r = std::hypot(eps, delta);
    if (r == 0.0) return Mat2::identity();
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    return {cplx(c, -s * eps / r), cplx(0.0, -s * delta / r),
            cplx(0.0, -s * delta / r), cplx(c, s * eps / r)};
}

} // namespace esle
