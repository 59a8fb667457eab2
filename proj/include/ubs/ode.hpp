#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include "ubs/errors.hpp"

namespace ubs {

// Adaptive Dormand-Prince 5(4) with FSAL and simple step control.
// The solver lands exactly on every requested output time, so sampled
// records carry no interpolation error at grid nodes; between nodes the
// caller interpolates with cubic Hermite from (y, y') pairs.

struct OdeOptions {
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    double h_init = 1e-3;
    double h_min = 1e-14;
    double h_max = 0.0;  // 0 = span/8
};

template <int N>
using OdeState = std::array<double, N>;

template <int N>
using OdeRhs = std::function<void(double, const OdeState<N>&, OdeState<N>&)>;

// Called after each accepted step that lands on an output time.
template <int N>
using OdeObserver = std::function<void(double, const OdeState<N>&, const OdeState<N>&)>;

// Optional guard evaluated on every accepted state; throws inside to abort.
template <int N>
using OdeGuard = std::function<void(double, const OdeState<N>&)>;

template <int N>
void ode_integrate(const OdeRhs<N>& rhs, double t0, double t1, OdeState<N> y,
                   const std::vector<double>& out_times, const OdeObserver<N>& observe,
                   const OdeOptions& opt = {}, const OdeGuard<N>& guard = {}) {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                            a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                            e4 = 125.0 / 192 - 393.0 / 640,
                            e5 = -2187.0 / 6784 + 92097.0 / 339200,
                            e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

    const double span = t1 - t0;
    if (span <= 0) throw StepError("ode_integrate: empty time span");
    const double h_max = (opt.h_max > 0) ? opt.h_max : span / 8.0;

    OdeState<N> k1, k2, k3, k4, k5, k6, k7, ytmp, ynew;
    rhs(t0, y, k1);

    std::size_t next_out = 0;
    if (next_out < out_times.size() && out_times[next_out] <= t0 + 1e-15 * span) {
        observe(t0, y, k1);
        ++next_out;
    }

    double t = t0;
    double h = std::min({opt.h_init, h_max, span});

    while (t < t1 - 1e-14 * span) {
        bool hit_output = false;
        if (next_out < out_times.size() && t + h >= out_times[next_out] - 1e-14 * span) {
            h = out_times[next_out] - t;
            hit_output = true;
        }
        if (t + h > t1) h = t1 - t;
        if (h < opt.h_min) throw StepError("ode_integrate: step size underflow");

        for (int i = 0; i < N; ++i) ytmp[i] = y[i] + h * a21 * k1[i];
        rhs(t + c2 * h, ytmp, k2);
        for (int i = 0; i < N; ++i) ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
        rhs(t + c3 * h, ytmp, k3);
        for (int i = 0; i < N; ++i)
            ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        rhs(t + c4 * h, ytmp, k4);
        for (int i = 0; i < N; ++i)
            ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        rhs(t + c5 * h, ytmp, k5);
        for (int i = 0; i < N; ++i)
            ytmp[i] = y[i] +
                      h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
        rhs(t + h, ytmp, k6);
        for (int i = 0; i < N; ++i)
            ynew[i] = y[i] +
                      h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        rhs(t + h, ynew, k7);

        double err = 0.0;
        for (int i = 0; i < N; ++i) {
            const double ei = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                                   e6 * k6[i] + e7 * k7[i]);
            const double sc =
                opt.abs_tol + opt.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
            err = std::max(err, std::abs(ei) / sc);
        }

        if (err <= 1.0) {
            t += h;
            y = ynew;
            k1 = k7;
            if (guard) guard(t, y);
            if (hit_output && next_out < out_times.size() &&
                std::abs(t - out_times[next_out]) <= 1e-12 * std::max(1.0, std::abs(t))) {
                observe(t, y, k1);
                ++next_out;
            }
        }

        const double fac = (err > 0) ? 0.9 * std::pow(err, -0.2) : 5.0;
        h *= std::min(5.0, std::max(0.2, fac));
        h = std::min(h, h_max);
    }
}

// Convenience: integrate and return only the final state.
template <int N>
OdeState<N> ode_final(const OdeRhs<N>& rhs, double t0, double t1, const OdeState<N>& y0,
                      const OdeOptions& opt = {}, const OdeGuard<N>& guard = {}) {
    OdeState<N> result = y0;
    std::vector<double> ts = {t1};
    ode_integrate<N>(
        rhs, t0, t1, y0, ts,
        [&](double, const OdeState<N>& y, const OdeState<N>&) { result = y; }, opt, guard);
    return result;
}

// Classic fixed-step RK4, used as an independent cross-check of the adaptive
// scheme in defect tests.
template <int N>
OdeState<N> rk4_step(const OdeRhs<N>& rhs, double t, const OdeState<N>& y, double h) {
    OdeState<N> k1, k2, k3, k4, tmp, out;
    rhs(t, y, k1);
    for (int i = 0; i < N; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
    rhs(t + 0.5 * h, tmp, k2);
    for (int i = 0; i < N; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
    rhs(t + 0.5 * h, tmp, k3);
    for (int i = 0; i < N; ++i) tmp[i] = y[i] + h * k3[i];
    rhs(t + h, tmp, k4);
    for (int i = 0; i < N; ++i)
        out[i] = y[i] + (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return out;
}

template <int N>
OdeState<N> rk4_integrate(const OdeRhs<N>& rhs, double t0, double t1, OdeState<N> y,
                          int n_steps) {
    const double h = (t1 - t0) / n_steps;
    for (int i = 0; i < n_steps; ++i) y = rk4_step<N>(rhs, t0 + i * h, y, h);
    return y;
}

}  // namespace ubs
