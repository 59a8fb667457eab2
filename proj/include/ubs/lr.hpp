#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "ubs/errors.hpp"
#include "ubs/ode.hpp"
#include "ubs/profile.hpp"
#include "ubs/util.hpp"

// Lewis-Riesenfeld machinery for a single time-dependent harmonic
// oscillator, in units hbar = m = omega0 = 1. The auxiliary function b(t)
// obeys  b'' + w^2(t) b - 1/b^3 = 0  and the accumulated phase is
// Theta(t) = -int 1/b^2.

namespace ubs {

using cplx = std::complex<double>;
inline constexpr cplx iu{0.0, 1.0};

struct BogoliubovCoeffs {
    cplx eta;
    cplx zeta;
    double lr_phase = 0.0;  // Theta(t) - Theta(t_start) + (t - t_start)

    double normalization_defect() const {
        return std::abs(std::norm(eta) - std::norm(zeta) - 1.0);
    }
};

namespace detail {
inline double hermite(double y0, double d0, double y1, double d1, double dt, double x) {
    const double h00 = (1.0 + 2.0 * x) * (1.0 - x) * (1.0 - x);
    const double h10 = x * (1.0 - x) * (1.0 - x);
    const double h01 = x * x * (3.0 - 2.0 * x);
    const double h11 = x * x * (x - 1.0);
    return h00 * y0 + h10 * dt * d0 + h01 * y1 + h11 * dt * d1;
}
}  // namespace detail

class AuxiliaryTrajectory {
  public:
    AuxiliaryTrajectory() = default;

    AuxiliaryTrajectory(std::function<double(double)> omega_sq, double t_start, double t_end,
                        std::vector<double> b, std::vector<double> b_dot,
                        std::vector<double> theta)
        : w2_(std::move(omega_sq)),
          t0_(t_start),
          t1_(t_end),
          b_(std::move(b)),
          bd_(std::move(b_dot)),
          th_(std::move(theta)) {
        dt_ = (t1_ - t0_) / static_cast<double>(b_.size() - 1);
    }

    double t_start() const { return t0_; }
    double t_end() const { return t1_; }
    double duration() const { return t1_ - t0_; }
    std::size_t size() const { return b_.size(); }
    double node_time(std::size_t i) const { return t0_ + dt_ * static_cast<double>(i); }
    const std::vector<double>& b_samples() const { return b_; }
    const std::vector<double>& b_dot_samples() const { return bd_; }
    const std::vector<double>& theta_samples() const { return th_; }
    double omega_sq(double t) const { return w2_(t); }

    double b(double t) const {
        const auto [i, x] = locate(t);
        return detail::hermite(b_[i], bd_[i], b_[i + 1], bd_[i + 1], dt_, x);
    }

    double b_dot(double t) const {
        const auto [i, x] = locate(t);
        return detail::hermite(bd_[i], bdd(i), bd_[i + 1], bdd(i + 1), dt_, x);
    }

    double theta(double t) const {
        const auto [i, x] = locate(t);
        const double d0 = -1.0 / (b_[i] * b_[i]);
        const double d1 = -1.0 / (b_[i + 1] * b_[i + 1]);
        return detail::hermite(th_[i], d0, th_[i + 1], d1, dt_, x);
    }

    // Defect of the stored solution: each grid interval is re-integrated with
    // a finely substepped classical RK4 from the left node and compared to
    // the stored right node. An incorrect (b, b') pair cannot pass this.
    double residual_max() const {
        double worst = 0.0;
        OdeRhs<2> rhs = [this](double t, const OdeState<2>& y, OdeState<2>& dy) {
            dy[0] = y[1];
            dy[1] = 1.0 / (y[0] * y[0] * y[0]) - w2_(t) * y[0];
        };
        for (std::size_t i = 0; i + 1 < b_.size(); ++i) {
            OdeState<2> y = {b_[i], bd_[i]};
            y = rk4_integrate<2>(rhs, node_time(i), node_time(i + 1), y, 8);
            worst = std::max(worst, std::abs(y[0] - b_[i + 1]));
            worst = std::max(worst, std::abs(y[1] - bd_[i + 1]));
        }
        return worst;
    }

    bool theta_monotone_decreasing() const {
        for (std::size_t i = 0; i + 1 < th_.size(); ++i)
            if (!(th_[i + 1] < th_[i])) return false;
        return true;
    }

  private:
    double bdd(std::size_t i) const {
        const double bi = b_[i];
        return 1.0 / (bi * bi * bi) - w2_(node_time(i)) * bi;
    }

    std::pair<std::size_t, double> locate(double t) const {
        if (t <= t0_) return {0, 0.0};
        if (t >= t1_) return {b_.size() - 2, 1.0};
        double u = (t - t0_) / dt_;
        auto i = static_cast<std::size_t>(u);
        if (i >= b_.size() - 1) i = b_.size() - 2;
        return {i, u - static_cast<double>(i)};
    }

    std::function<double(double)> w2_;
    double t0_ = 0.0, t1_ = 1.0, dt_ = 1.0;
    std::vector<double> b_, bd_, th_;
};

struct AuxiliaryOptions {
    double b_min = 1e-6;
    std::size_t n_samples = 0;  // 0 = default grid density
    OdeOptions ode;
};

inline AuxiliaryTrajectory integrate_auxiliary(const std::function<double(double)>& omega_sq,
                                               double t_start, double t_end, double b0,
                                               double bdot0,
                                               const AuxiliaryOptions& opt = {}) {
    if (!(b0 > 0)) throw SingularityError("integrate_auxiliary: b0 must be positive");
    const std::size_t n =
        (opt.n_samples >= 2) ? opt.n_samples : default_grid_points(t_start, t_end);

    OdeRhs<3> rhs = [&omega_sq](double t, const OdeState<3>& y, OdeState<3>& dy) {
        dy[0] = y[1];
        dy[1] = 1.0 / (y[0] * y[0] * y[0]) - omega_sq(t) * y[0];
        dy[2] = -1.0 / (y[0] * y[0]);
    };
    OdeGuard<3> guard = [b_min = opt.b_min](double t, const OdeState<3>& y) {
        if (y[0] <= b_min)
            throw SingularityError("integrate_auxiliary: b reached b_min at t=" +
                                   std::to_string(t));
    };

    std::vector<double> ts(n);
    for (std::size_t i = 0; i < n; ++i)
        ts[i] = t_start + (t_end - t_start) * static_cast<double>(i) /
                              static_cast<double>(n - 1);

    std::vector<double> b, bd, th;
    b.reserve(n);
    bd.reserve(n);
    th.reserve(n);
    ode_integrate<3>(
        rhs, t_start, t_end, {b0, bdot0, 0.0}, ts,
        [&](double, const OdeState<3>& y, const OdeState<3>&) {
            b.push_back(y[0]);
            bd.push_back(y[1]);
            th.push_back(y[2]);
        },
        opt.ode, guard);

    return AuxiliaryTrajectory(omega_sq, t_start, t_end, std::move(b), std::move(bd),
                               std::move(th));
}

inline AuxiliaryTrajectory integrate_auxiliary(const TimeProfile& omega_sq, double b0,
                                               double bdot0, const AuxiliaryOptions& opt = {}) {
    AuxiliaryOptions o = opt;
    if (o.n_samples < 2) o.n_samples = omega_sq.size();
    return integrate_auxiliary([omega_sq](double t) { return omega_sq(t); },
                               omega_sq.t_start(), omega_sq.t_end(), b0, bdot0, o);
}

inline BogoliubovCoeffs bogoliubov_at(const AuxiliaryTrajectory& traj, double t) {
    if (t < traj.t_start() - 1e-12 || t > traj.t_end() + 1e-12)
        throw BoundaryError("bogoliubov_at: t outside trajectory grid");
    const double b = traj.b(t);
    const double bd = traj.b_dot(t);
    BogoliubovCoeffs c;
    c.eta = 0.5 * cplx(1.0 / b + b, -bd);
    c.zeta = 0.5 * cplx(1.0 / b - b, -bd);
    c.lr_phase = traj.theta(t) + (t - traj.t_start());
    return c;
}

// Single-mode linear transform a -> E a + F a^dag, the interaction-picture
// action of one trap-control stage.
struct LinearGate {
    cplx E{1.0, 0.0};
    cplx F{0.0, 0.0};

    // sequential composition: first self, then next
    LinearGate then(const LinearGate& next) const {
        return LinearGate{next.E * E + next.F * std::conj(F),
                          next.E * F + next.F * std::conj(E)};
    }

    double symplectic_defect() const { return std::abs(std::norm(E) - std::norm(F) - 1.0); }

    static LinearGate identity() { return {}; }
    static LinearGate phase(double phi) { return LinearGate{std::exp(-iu * phi), 0.0}; }
    static LinearGate squeeze(cplx g) {
        const double r = std::abs(g);
        if (r == 0.0) return identity();
        return LinearGate{std::cosh(r), -(g / r) * std::sinh(r)};
    }
};

// Bogoliubov transform of a closed stage whose trap starts and ends at the
// storage frequency.
inline LinearGate lr_gate(const AuxiliaryTrajectory& traj, double boundary_tol = 1e-10) {
    const double w2a = traj.omega_sq(traj.t_start());
    const double w2b = traj.omega_sq(traj.t_end());
    if (std::abs(w2a - 1.0) > boundary_tol || std::abs(w2b - 1.0) > boundary_tol)
        throw BoundaryError("lr_gate: endpoint trap frequency differs from storage value");
    const BogoliubovCoeffs c = bogoliubov_at(traj, traj.t_end());
    const double T = traj.duration();
    const double dtheta = traj.theta(traj.t_end());
    const double phi_p = dtheta + T;
    const double phi_m = dtheta - T;
    return LinearGate{std::conj(c.eta) * std::exp(iu * phi_p),
                      -c.zeta * std::exp(-iu * phi_m)};
}

// ---------------------------------------------------------------------------
// Classical motion in a (possibly moving) harmonic trap
// ---------------------------------------------------------------------------

struct ClassicalTrajectory {
    double t_start = 0.0, t_end = 1.0, dt = 1.0;
    std::vector<double> x, p;

    double x_at(double t) const { return interp(x, p, t); }
    double p_at(double t) const {
        // momentum nodes carry pdot from the stored force samples
        const auto [i, u] = locate(t);
        return detail::hermite(p[i], pdot[i], p[i + 1], pdot[i + 1], dt, u);
    }
    std::vector<double> pdot;  // force samples at nodes

    std::size_t size() const { return x.size(); }
    double node_time(std::size_t i) const { return t_start + dt * static_cast<double>(i); }

  private:
    std::pair<std::size_t, double> locate(double t) const {
        if (t <= t_start) return {0, 0.0};
        if (t >= t_end) return {x.size() - 2, 1.0};
        double u = (t - t_start) / dt;
        auto i = static_cast<std::size_t>(u);
        if (i >= x.size() - 1) i = x.size() - 2;
        return {i, u - static_cast<double>(i)};
    }
    double interp(const std::vector<double>& y, const std::vector<double>& d, double t) const {
        const auto [i, u] = locate(t);
        return detail::hermite(y[i], d[i], y[i + 1], d[i + 1], dt, u);
    }
};

// x' = p, p' = -w^2(t) (x - s(t))
inline ClassicalTrajectory classical_trajectory(const std::function<double(double)>& omega_sq,
                                                const std::function<double(double)>& s,
                                                double t_start, double t_end, double x0,
                                                double p0, std::size_t n_samples = 0,
                                                const OdeOptions& ode = {}) {
    const std::size_t n = (n_samples >= 2) ? n_samples : default_grid_points(t_start, t_end);
    OdeRhs<2> rhs = [&](double t, const OdeState<2>& y, OdeState<2>& dy) {
        dy[0] = y[1];
        dy[1] = -omega_sq(t) * (y[0] - s(t));
    };
    std::vector<double> ts(n);
    for (std::size_t i = 0; i < n; ++i)
        ts[i] = t_start + (t_end - t_start) * static_cast<double>(i) /
                              static_cast<double>(n - 1);
    ClassicalTrajectory out;
    out.t_start = t_start;
    out.t_end = t_end;
    out.dt = (t_end - t_start) / static_cast<double>(n - 1);
    out.x.reserve(n);
    out.p.reserve(n);
    out.pdot.reserve(n);
    ode_integrate<2>(
        rhs, t_start, t_end, {x0, p0}, ts,
        [&](double, const OdeState<2>& y, const OdeState<2>& dy) {
            out.x.push_back(y[0]);
            out.p.push_back(y[1]);
            out.pdot.push_back(dy[1]);
        },
        ode);
    return out;
}

// Final displacement beta(T) of a stage with both trap strength and centre
// varying, evaluated by quadrature over the auxiliary solution.
inline cplx generalized_beta(const AuxiliaryTrajectory& traj,
                             const std::function<double(double)>& s,
                             double boundary_tol = 1e-10) {
    const double w2a = traj.omega_sq(traj.t_start());
    const double w2b = traj.omega_sq(traj.t_end());
    if (std::abs(w2a - 1.0) > boundary_tol || std::abs(w2b - 1.0) > boundary_tol)
        throw BoundaryError("generalized_beta: endpoint trap frequency differs from storage");

    const double T = traj.duration();
    const double t0 = traj.t_start();
    auto integrand = [&](double t) -> cplx {
        const double b = traj.b(t);
        const double th = traj.theta(t);
        return b * traj.omega_sq(t) * s(t) * std::exp(-iu * th);
    };
    const int panels = static_cast<int>(std::ceil(T / 0.25)) + 1;
    const cplx integral = gauss_legendre_n(integrand, t0, traj.t_end(), panels);

    const BogoliubovCoeffs c = bogoliubov_at(traj, traj.t_end());
    const double dtheta = traj.theta(traj.t_end());
    const cplx bracket = std::conj(c.eta) * std::exp(iu * (dtheta + T)) +
                         c.zeta * std::exp(-iu * (dtheta - T));
    return iu / std::sqrt(2.0) * integral * bracket;
}

// ---------------------------------------------------------------------------
// Envelope fit for constant-frequency segments
// ---------------------------------------------------------------------------

struct EnvelopeFit {
    double delta = 0.0;
    double phi = 0.0;
    double residual = 0.0;  // rms misfit of b^2*omega against the model
};

// Fit b^2 = (1/w) (cosh(delta) + sinh(delta) sin(2 w t + phi)) over
// [t_from, t_to], where w is the (constant) trap frequency there. Linear
// least squares in (cosh, sinh cos, sinh sin).
inline EnvelopeFit fit_envelope(const AuxiliaryTrajectory& traj, double t_from, double t_to,
                                double omega) {
    const int m = 241;
    double A[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
    double rhs[3] = {0, 0, 0};
    for (int k = 0; k < m; ++k) {
        const double t = t_from + (t_to - t_from) * k / (m - 1);
        const double b = traj.b(t);
        const double y = b * b * omega;
        const double phi2 = 2.0 * omega * t;
        const double base[3] = {1.0, std::sin(phi2), std::cos(phi2)};
        for (int i = 0; i < 3; ++i) {
            rhs[i] += base[i] * y;
            for (int j = 0; j < 3; ++j) A[i][j] += base[i] * base[j];
        }
    }
    // Gaussian elimination, 3x3
    double M[3][4];
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) M[i][j] = A[i][j];
        M[i][3] = rhs[i];
    }
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::abs(M[r][col]) > std::abs(M[piv][col])) piv = r;
        for (int j = 0; j < 4; ++j) std::swap(M[col][j], M[piv][j]);
        for (int r = 0; r < 3; ++r) {
            if (r == col) continue;
            const double f = M[r][col] / M[col][col];
            for (int j = col; j < 4; ++j) M[r][j] -= f * M[col][j];
        }
    }
    const double c0 = M[0][3] / M[0][0];
    const double c1 = M[1][3] / M[1][1];
    const double c2 = M[2][3] / M[2][2];

    EnvelopeFit fit;
    fit.delta = std::asinh(std::sqrt(c1 * c1 + c2 * c2));
    fit.phi = std::atan2(c2, c1);
    double ss = 0.0;
    for (int k = 0; k < m; ++k) {
        const double t = t_from + (t_to - t_from) * k / (m - 1);
        const double b = traj.b(t);
        const double model =
            std::cosh(fit.delta) + std::sinh(fit.delta) * std::sin(2.0 * omega * t + fit.phi);
        const double r = b * b * omega - model;
        ss += r * r;
    }
    fit.residual = std::sqrt(ss / m);
    return fit;
}

}  // namespace ubs
