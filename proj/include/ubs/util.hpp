#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "ubs/errors.hpp"

namespace ubs {

inline constexpr double pi = 3.141592653589793238462643383279502884;

// ---------------------------------------------------------------------------
// Root finding
// ---------------------------------------------------------------------------

// Bisection on a bracketing interval [a,b] with f(a), f(b) of opposite sign.
// Tolerance is on the argument.
inline double bisect(const std::function<double(double)>& f, double a, double b,
                     double xtol = 1e-13, int max_iter = 200) {
    double fa = f(a);
    double fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if ((fa > 0) == (fb > 0))
        throw RootBracketError("bisect: interval does not bracket a root");
    for (int i = 0; i < max_iter; ++i) {
        const double m = 0.5 * (a + b);
        const double fm = f(m);
        if (fm == 0.0 || 0.5 * (b - a) < xtol) return m;
        if ((fm > 0) == (fa > 0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

// Scan [a,b] in n steps and return the first sign-change bracket of f.
inline bool scan_bracket(const std::function<double(double)>& f, double a, double b,
                         int n, double& lo, double& hi) {
    double x0 = a;
    double f0 = f(a);
    for (int i = 1; i <= n; ++i) {
        const double x1 = a + (b - a) * i / n;
        const double f1 = f(x1);
        if (f0 == 0.0 || (f0 > 0) != (f1 > 0)) {
            lo = x0;
            hi = x1;
            return true;
        }
        x0 = x1;
        f0 = f1;
    }
    return false;
}

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

// 20-point Gauss-Legendre nodes/weights on [-1,1] (positive half; symmetric).
namespace detail {
inline constexpr double gl20_x[10] = {
    0.0765265211334973, 0.2277858511416451, 0.3737060887154196,
    0.5108670019508271, 0.6360536807265150, 0.7463319064601508,
    0.8391169718222188, 0.9122344282513259, 0.9639719272779138,
    0.9931285991850949};
inline constexpr double gl20_w[10] = {
    0.1527533871307258, 0.1491729864726037, 0.1420961093183821,
    0.1316886384491766, 0.1181945319615184, 0.1019301198172404,
    0.0832767415767048, 0.0626720483341091, 0.0406014298003869,
    0.0176140071391521};
}  // namespace detail

template <typename F>
auto gauss_legendre(F&& f, double a, double b) -> decltype(f(a)) {
    using R = decltype(f(a));
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    R acc = R{};
    for (int i = 0; i < 10; ++i) {
        acc += detail::gl20_w[i] * (f(c + h * detail::gl20_x[i]) + f(c - h * detail::gl20_x[i]));
    }
    return h * acc;
}

// Panelled Gauss-Legendre: subdivide [a,b] into n panels.
template <typename F>
auto gauss_legendre_n(F&& f, double a, double b, int n) -> decltype(f(a)) {
    using R = decltype(f(a));
    R acc = R{};
    for (int i = 0; i < n; ++i) {
        const double x0 = a + (b - a) * i / n;
        const double x1 = a + (b - a) * (i + 1) / n;
        acc += gauss_legendre(f, x0, x1);
    }
    return acc;
}

// Composite Simpson over a uniformly sampled sequence (odd count preferred;
// a trapezoid patch covers the final interval when the count is even).
template <typename R>
R simpson_sampled(const std::vector<R>& y, double dx) {
    const std::size_t n = y.size();
    if (n < 2) return R{};
    R acc = R{};
    std::size_t m = (n % 2 == 1) ? n : n - 1;
    for (std::size_t i = 0; i + 2 < m + 1; i += 2)
        acc += (y[i] + 4.0 * y[i + 1] + y[i + 2]) * (dx / 3.0);
    if (n % 2 == 0) acc += (y[n - 2] + y[n - 1]) * (0.5 * dx);
    return acc;
}

// ---------------------------------------------------------------------------
// Smooth blends and template derivatives
// ---------------------------------------------------------------------------

// Quintic smoothstep h with h(0)=0, h(1)=1 and h'=h''=0 at both ends.
inline double smoothstep5(double s) {
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    return s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
}
inline double smoothstep5_d1(double s) {
    if (s <= 0.0 || s >= 1.0) return 0.0;
    return s * s * (30.0 + s * (-60.0 + 30.0 * s));
}
inline double smoothstep5_d2(double s) {
    if (s <= 0.0 || s >= 1.0) return 0.0;
    return s * (60.0 + s * (-180.0 + 120.0 * s));
}

// Value and first four derivatives of exp(-g(t)) given g and derivatives
// (Faa di Bruno through fourth order).
struct Deriv4 {
    double f = 0, d1 = 0, d2 = 0, d3 = 0, d4 = 0;
};

inline Deriv4 exp_neg(const Deriv4& g) {
    Deriv4 e;
    e.f = std::exp(-g.f);
    e.d1 = -g.d1 * e.f;
    e.d2 = (g.d1 * g.d1 - g.d2) * e.f;
    e.d3 = (-g.d1 * g.d1 * g.d1 + 3.0 * g.d1 * g.d2 - g.d3) * e.f;
    e.d4 = (g.d1 * g.d1 * g.d1 * g.d1 - 6.0 * g.d1 * g.d1 * g.d2 + 3.0 * g.d2 * g.d2 +
            4.0 * g.d1 * g.d3 - g.d4) *
           e.f;
    return e;
}

// g(t) = (t-c)^2 / s^2
inline Deriv4 gauss_exponent(double t, double c, double sigma) {
    const double u = (t - c) / (sigma * sigma);
    Deriv4 g;
    g.f = (t - c) * (t - c) / (sigma * sigma);
    g.d1 = 2.0 * u;
    g.d2 = 2.0 / (sigma * sigma);
    g.d3 = 0.0;
    g.d4 = 0.0;
    return g;
}

// g(t) = t^3 / s^3
inline Deriv4 cubic_exponent(double t, double sigma) {
    const double s3 = sigma * sigma * sigma;
    Deriv4 g;
    g.f = t * t * t / s3;
    g.d1 = 3.0 * t * t / s3;
    g.d2 = 6.0 * t / s3;
    g.d3 = 6.0 / s3;
    g.d4 = 0.0;
    return g;
}

// ---------------------------------------------------------------------------
// Misc
// ---------------------------------------------------------------------------

inline double wrap_angle(double a) {
    // wrap to (-pi, pi]
    a = std::fmod(a, 2.0 * pi);
    if (a <= -pi) a += 2.0 * pi;
    if (a > pi) a -= 2.0 * pi;
    return a;
}

inline double positive_mod_2pi(double a) {
    a = std::fmod(a, 2.0 * pi);
    if (a < 0) a += 2.0 * pi;
    return a;
}

inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

// Fixed-format double for deterministic CSV output.
inline std::string fmt_g(double v, int prec = 12) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    return std::string(buf);
}

}  // namespace ubs
