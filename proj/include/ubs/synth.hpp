#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <vector>

#include "ubs/errors.hpp"
#include "ubs/lr.hpp"
#include "ubs/profile.hpp"
#include "ubs/util.hpp"

// Inverse engineering of trap controls for target single-mode gates.
// Conventions (units hbar = m = omega0 = 1):
//   displacement  a -> a + alpha,  alpha[s] = -(1/sqrt2) int s'(t) e^{it} dt
//   phase         a -> a e^{-i phi}, phi = -(Theta(T) + T)
//   squeeze       a -> cosh|g| a - (g/|g|) sinh|g| a^dag,  |g| = delta/2

namespace ubs {

enum class GateKind { Displacement, Phase, Squeeze, NonlinearPhase };

struct GateTarget {
    GateKind kind = GateKind::Phase;
    cplx alpha{};
    double phi = 0.0;
    cplx g{};
    double mu = 0.0;
    double T = 0.0;
};

struct SynthesizedControl {
    GateKind kind = GateKind::Phase;
    double t_start = 0.0;
    double t_end = 0.0;
    std::function<double(double)> control;  // s(t), omega^2(t) or F(t)
    TimeProfile profile;                    // sampled copy of the control

    LinearGate predicted;

    // residual report, kind-dependent
    cplx alpha_target{}, alpha_achieved{};
    double phi_target = 0.0, phi_achieved = 0.0;
    cplx g_target{};
    double g_abs_achieved = 0.0;
    double zeta_residual = 0.0;
    double k = 0.0;  // template amplitude found by the root search
    double phase_pre = 0.0, phase_post = 0.0;
    double mu = 0.0;
    double rwa_metric = 0.0;
    bool rwa_warning = false;
};

// ---------------------------------------------------------------------------
// Displacement functional
// ---------------------------------------------------------------------------

struct Path {
    std::function<double(double)> s;
    std::function<double(double)> s_dot;
    double T = 0.0;
};

inline Path path_half_sine(double T) {
    return {[T](double t) { return std::sin(pi * t / T); },
            [T](double t) { return pi / T * std::cos(pi * t / T); }, T};
}
inline Path path_full_sine(double T) {
    return {[T](double t) { return std::sin(2.0 * pi * t / T); },
            [T](double t) { return 2.0 * pi / T * std::cos(2.0 * pi * t / T); }, T};
}
// Resonant carrier under a smooth window; its quadratures never vanish, so it
// rescues the sine templates when the duration makes them collinear.
inline Path path_carrier_bump(double T) {
    return {[T](double t) {
                const double w = std::sin(pi * t / T);
                return std::sin(t) * w * w;
            },
            [T](double t) {
                const double w = std::sin(pi * t / T);
                return std::cos(t) * w * w + std::sin(t) * 2.0 * w * std::cos(pi * t / T) * pi / T;
            },
            T};
}

inline Path path_combine(double g1, const Path& a, double g2, const Path& b) {
    return {[=, sa = a.s, sb = b.s](double t) { return g1 * sa(t) + g2 * sb(t); },
            [=, da = a.s_dot, db = b.s_dot](double t) { return g1 * da(t) + g2 * db(t); },
            a.T};
}

// Quadrature of the sampled derivative (composite Simpson).
inline cplx alpha_of_path(const Path& path, std::size_t n_samples = 8193,
                          double boundary_tol = 1e-9) {
    if (std::abs(path.s(0.0)) > boundary_tol || std::abs(path.s(path.T)) > boundary_tol)
        throw BoundaryError("alpha_of_path: path endpoints must vanish");
    if (n_samples % 2 == 0) ++n_samples;
    std::vector<cplx> y(n_samples);
    const double dt = path.T / static_cast<double>(n_samples - 1);
    for (std::size_t i = 0; i < n_samples; ++i) {
        const double t = dt * static_cast<double>(i);
        y[i] = path.s_dot(t) * std::exp(iu * t);
    }
    return -simpson_sampled(y, dt) / std::sqrt(2.0);
}

// Independent route: integrate by parts (boundary terms vanish) and apply
// Gauss-Legendre panels to s itself.
inline cplx alpha_of_path_ibp(const Path& path, double boundary_tol = 1e-9) {
    if (std::abs(path.s(0.0)) > boundary_tol || std::abs(path.s(path.T)) > boundary_tol)
        throw BoundaryError("alpha_of_path: path endpoints must vanish");
    const int panels = static_cast<int>(std::ceil(path.T / 0.5)) + 1;
    const cplx integral = gauss_legendre_n(
        [&](double t) { return path.s(t) * std::exp(iu * t); }, 0.0, path.T, panels);
    return iu / std::sqrt(2.0) * integral;
}

inline cplx alpha_of_path(const TimeProfile& s, std::size_t n_samples = 8193) {
    Path p{[&s](double t) { return s(t); }, [&s](double t) { return s.derivative(t); },
           s.duration()};
    return alpha_of_path(p, n_samples);
}

inline SynthesizedControl synthesize_displacement(cplx alpha_target, double T) {
    if (!(T > 0)) throw ConfigError("synthesize_displacement: T must be positive");

    SynthesizedControl out;
    out.kind = GateKind::Displacement;
    out.t_start = 0.0;
    out.t_end = T;
    out.alpha_target = alpha_target;

    const std::size_t n_grid = default_grid_points(0.0, T);
    if (std::abs(alpha_target) == 0.0) {
        out.control = [](double) { return 0.0; };
        out.profile = TimeProfile::constant(0.0, 0.0, T);
        out.predicted = LinearGate::identity();
        return out;
    }

    const Path cand[3] = {path_half_sine(T), path_full_sine(T), path_carrier_bump(T)};
    cplx a[3];
    for (int i = 0; i < 3; ++i) a[i] = alpha_of_path_ibp(cand[i]);

    auto collinear = [](cplx u, cplx v) {
        const double cross = std::abs(std::imag(std::conj(u) * v));
        return cross <= 1e-9 * (std::abs(u) * std::abs(v) + 1e-300);
    };

    const int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
    int ia = -1, ib = -1;
    for (auto& pr : pairs) {
        if (std::abs(a[pr[0]]) < 1e-12 || std::abs(a[pr[1]]) < 1e-12) continue;
        if (!collinear(a[pr[0]], a[pr[1]])) {
            ia = pr[0];
            ib = pr[1];
            break;
        }
    }
    if (ia < 0)
        throw DegenerateBasisError(
            "synthesize_displacement: all template path pairs are real-collinear");

    // 2x2 real solve gamma_a alpha_a + gamma_b alpha_b = alpha_target
    const double det = a[ia].real() * a[ib].imag() - a[ib].real() * a[ia].imag();
    const double g1 =
        (alpha_target.real() * a[ib].imag() - a[ib].real() * alpha_target.imag()) / det;
    const double g2 =
        (a[ia].real() * alpha_target.imag() - alpha_target.real() * a[ia].imag()) / det;

    Path s = path_combine(g1, cand[ia], g2, cand[ib]);
    out.control = s.s;
    out.profile = TimeProfile::sample(s.s, 0.0, T, n_grid);
    out.alpha_achieved = alpha_of_path(s);
    out.predicted = LinearGate::identity();  // displacement leaves (eta, zeta) = (1, 0)
    return out;
}

// ---------------------------------------------------------------------------
// Phase-shift profile
// ---------------------------------------------------------------------------

namespace detail {

// Gaussian-dip auxiliary template and the trap profile it induces. The raw
// template has exponentially small but nonzero endpoint offsets in
// omega^2; a linear blend of the two endpoint offsets is subtracted so the
// profile meets the storage frequency exactly. The amplitude k is then
// root-found against the snapped profile, which keeps the phase exact.
struct GaussianDipProfile {
    double k, sigma, T, center;
    double off0 = 0.0, off1 = 0.0;

    GaussianDipProfile(double k_, double sigma_, double T_, double center_)
        : k(k_), sigma(sigma_), T(T_), center(center_) {
        off0 = raw(0.0) - 1.0;
        off1 = raw(T) - 1.0;
    }

    double raw(double t) const {
        const Deriv4 e = exp_neg(gauss_exponent(t, center, sigma));
        const double b = 1.0 - k * e.f;
        const double bdd = -k * e.d2;
        return (1.0 / (b * b * b) - bdd) / b;
    }

    double operator()(double t) const {
        return raw(t) - (off0 * (1.0 - t / T) + off1 * (t / T));
    }
};

}  // namespace detail

inline SynthesizedControl phase_profile(double phi_target, double sigma, double T,
                                        std::optional<double> center_opt = std::nullopt) {
    if (!(sigma > 0) || !(T > 0) || !(sigma < T / 6.0))
        throw ConfigError("phase_profile: need 0 < sigma < T/6");
    const double center = center_opt.value_or(T / 2.0);
    if (center < 3.0 * sigma || center > T - 3.0 * sigma)
        throw ConfigError("phase_profile: Gaussian centre too close to an endpoint");

    SynthesizedControl out;
    out.kind = GateKind::Phase;
    out.t_start = 0.0;
    out.t_end = T;
    const double phi_t = positive_mod_2pi(phi_target);
    out.phi_target = phi_t;

    const std::size_t n_grid = default_grid_points(0.0, T);
    if (phi_t < 1e-12 || phi_t > 2.0 * pi - 1e-12) {
        out.control = [](double) { return 1.0; };
        out.profile = TimeProfile::constant(1.0, 0.0, T);
        out.predicted = LinearGate::identity();
        return out;
    }

    auto achieved = [&](double k) {
        detail::GaussianDipProfile w2(k, sigma, T, center);
        const auto traj = integrate_auxiliary(w2, 0.0, T, 1.0, 0.0,
                                              {.n_samples = 65});  // endpoint only
        return -(traj.theta(T) + T);
    };

    auto f = [&](double k) { return achieved(k) - phi_t; };
    double lo, hi;
    if (!scan_bracket(f, 1e-4, 0.9, 60, lo, hi))
        throw RootBracketError("phase_profile: no k in (0, 0.9) reaches the target phase");
    const double k = bisect(f, lo, hi, 1e-13);

    detail::GaussianDipProfile w2(k, sigma, T, center);
    const auto traj =
        integrate_auxiliary(w2, 0.0, T, 1.0, 0.0, {.n_samples = n_grid});
    const auto c = bogoliubov_at(traj, T);

    out.k = k;
    out.control = w2;
    out.profile = TimeProfile::sample(w2, 0.0, T, n_grid);
    out.phi_achieved = positive_mod_2pi(-(traj.theta(T) + T));
    out.zeta_residual = std::abs(c.zeta);
    out.predicted = lr_gate(traj);
    return out;
}

// ---------------------------------------------------------------------------
// Squeeze profile
// ---------------------------------------------------------------------------

namespace detail {

// Template: constant-trap breathing solution blended in from b = 1 with a
// quintic smoothstep; exact storage frequency at both endpoints.
struct SqueezeProfile {
    double delta, T;

    double b3(double t, double& bd, double& bdd) const {
        const double ch = std::cosh(delta), sh = std::sinh(delta);
        const double G = ch + sh * std::sin(2.0 * t);
        const double Gd = 2.0 * sh * std::cos(2.0 * t);
        const double Gdd = -4.0 * sh * std::sin(2.0 * t);
        const double u = std::sqrt(G);
        const double ud = Gd / (2.0 * u);
        const double udd = Gdd / (2.0 * u) - Gd * Gd / (4.0 * G * u);
        const double s = t / T;
        const double h = smoothstep5(s);
        const double hd = smoothstep5_d1(s) / T;
        const double hdd = smoothstep5_d2(s) / (T * T);
        const double b = u * h + (1.0 - h);
        bd = ud * h + (u - 1.0) * hd;
        bdd = udd * h + 2.0 * ud * hd + (u - 1.0) * hdd;
        return b;
    }

    double operator()(double t) const {
        if (t <= 0.0) return 1.0;
        if (t >= T) return 1.0;
        double bd, bdd;
        const double b = b3(t, bd, bdd);
        return (1.0 / (b * b * b) - bdd) / b;
    }
};

}  // namespace detail

struct SqueezeOptions {
    double omega_sq_floor = 0.0;
    bool allow_anti_trapping = false;
};

inline SynthesizedControl synthesize_squeeze(cplx g_target, double T,
                                             const SqueezeOptions& opt = {}) {
    if (std::abs(g_target) > 2.0)
        throw ConfigError("synthesize_squeeze: |g| above practical range (2)");
    if (!(T >= 4.0 * pi)) throw ConfigError("synthesize_squeeze: need T >= 4 pi");

    SynthesizedControl out;
    out.kind = GateKind::Squeeze;
    out.t_start = 0.0;
    out.t_end = T;
    out.g_target = g_target;

    const std::size_t n_grid = default_grid_points(0.0, T);
    if (std::abs(g_target) == 0.0) {
        out.control = [](double) { return 1.0; };
        out.profile = TimeProfile::constant(1.0, 0.0, T);
        out.predicted = LinearGate::identity();
        return out;
    }

    const double delta = 2.0 * std::abs(g_target);
    detail::SqueezeProfile w2{delta, T};
    out.k = delta;

    double w2_min = 1.0;
    for (std::size_t i = 0; i < 4096; ++i)
        w2_min = std::min(w2_min, w2(T * static_cast<double>(i) / 4095.0));
    if (w2_min < opt.omega_sq_floor && !opt.allow_anti_trapping)
        throw NonPositiveOmegaSqError("synthesize_squeeze: profile dips below omega^2 floor (" +
                                      std::to_string(w2_min) + ")");

    const auto traj = integrate_auxiliary(w2, 0.0, T, 1.0, 0.0, {.n_samples = n_grid});
    const auto c = bogoliubov_at(traj, T);
    const LinearGate raw = lr_gate(traj);

    out.control = w2;
    out.profile = TimeProfile::sample(w2, 0.0, T, n_grid);
    out.g_abs_achieved = std::asinh(std::abs(c.zeta));
    out.zeta_residual = std::abs(std::abs(c.zeta) - std::sinh(std::abs(g_target)));

    // phase rectification: P(post) . raw . P(pre) = S(g_target)
    const double gamma_e = std::arg(raw.E);
    const double gamma_d = std::arg(raw.F) - (std::arg(g_target) + pi);
    out.phase_post = positive_mod_2pi(0.5 * (gamma_e + gamma_d));
    out.phase_pre = positive_mod_2pi(0.5 * (gamma_e - gamma_d));
    out.predicted = LinearGate::phase(out.phase_pre)
                        .then(raw)
                        .then(LinearGate::phase(out.phase_post));
    return out;
}

// ---------------------------------------------------------------------------
// Quartic nonlinear gate schedule
// ---------------------------------------------------------------------------

inline SynthesizedControl nonlinear_gate(double mu_target, double T, int n_max) {
    if (!(T > 0) || n_max < 1) throw ConfigError("nonlinear_gate: need T > 0, n_max >= 1");

    SynthesizedControl out;
    out.kind = GateKind::NonlinearPhase;
    out.t_start = 0.0;
    out.t_end = T;
    out.mu = mu_target;
    out.rwa_metric = static_cast<double>(n_max) * static_cast<double>(n_max) *
                     std::abs(mu_target) / T;
    out.rwa_warning = out.rwa_metric > 0.1;

    // raised-cosine envelope, zero at both ends, unit integral times mu
    const double amp = mu_target / T;
    out.control = [amp, T](double t) {
        if (t < 0.0 || t > T) return 0.0;
        return amp * (1.0 - std::cos(2.0 * pi * t / T));
    };
    out.profile = TimeProfile::sample(out.control, 0.0, T, default_grid_points(0.0, T));
    out.predicted = LinearGate::identity();
    return out;
}

// Diagonal phase of the quartic gate on Fock level n.
inline double nonlinear_gate_phase(double mu, int n) {
    return -mu * (6.0 * n * (n - 1.0) + 12.0 * n);
}

}  // namespace ubs
