#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "ubs/constants.hpp"
#include "ubs/errors.hpp"
#include "ubs/fock.hpp"
#include "ubs/two_ion.hpp"
#include "ubs/util.hpp"

// Quantum fluctuation dynamics of the double-well stages: the +/- normal
// modes evolve in truncated Fock space with the anharmonic corrections of
// the exact Coulomb remainder and the quartic well, cross-coupled through
// mean-field moments. Quadratures q are in ground-state-length units x0
// while separations r are in Coulomb-length units l0; the only physical
// input is their ratio eps = x0/l0.

namespace ubs {

struct ExperimentResult {
    double fidelity = 1.0;
    double phase_error = 0.0;  // radians, achieved vs target mode phase
    double duration = 0.0;     // units 1/omega0
    double min_separation = 0.0;  // units l0
    double excitation_quanta = 0.0;
    double excitation_plus = 0.0;
    double excitation_minus = 0.0;
    double theta_achieved = 0.0;
    double norm_drift = 0.0;
};

struct ModeMoments {
    double q = 0.0;
    double q2 = 0.5;
};

// Time-dependent Hamiltonian builders for the centre-of-mass (+) and
// breathing (-) modes. `other` carries the mean-field moments of the
// opposite mode.
struct BsHamiltonians {
    std::function<MatrixXd(double t, const ModeMoments& other)> minus;
    std::function<MatrixXd(double t, const ModeMoments& other)> plus;
};

struct BsHamiltonianOptions {
    double eps = 0.0035729;  // x0/l0 for 40Ca+ at omega0 = 2 pi MHz
    bool anharmonic = true;
};

inline BsHamiltonians bs_hamiltonians(const Ladders& L,
                                      std::function<double(double)> quartic_a,
                                      std::function<double(double)> separation_r,
                                      std::function<double(double)> omega_minus_sq,
                                      double min_separation,
                                      const BsHamiltonianOptions& opt = {}) {
    const double eps = opt.eps;
    const double lam_max = std::max(std::abs(L.q_eigval[0]),
                                    std::abs(L.q_eigval[L.n_cut - 1]));
    if (opt.anharmonic && std::sqrt(2.0) * eps * lam_max >= 0.5 * min_separation)
        throw DomainError(
            "bs_hamiltonians: position eigenvalues reach half the ion separation; "
            "cutoff too large for this run");

    const bool anh = opt.anharmonic;
    auto minus = [&L, quartic_a, separation_r, omega_minus_sq, eps,
                  anh](double t, const ModeMoments& other) {
        const double wm2 = omega_minus_sq(t);
        MatrixXd H = 0.5 * L.p2 + (0.5 * wm2) * L.q2;
        if (anh) {
            const double a = quartic_a(t);
            const double r = separation_r(t);
            const double c_cubic = std::sqrt(2.0) * a * r * eps;
            H += c_cubic * (L.q3 + 3.0 * other.q2 * L.q);
            H += (0.5 * a * eps * eps) * (L.q4 + 6.0 * other.q2 * L.q2);
            // exact Coulomb remainder as a matrix function of q
            const double pref = -2.0 * std::sqrt(2.0) * eps / (r * r * r);
            VectorXd diag(L.n_cut);
            for (int i = 0; i < L.n_cut; ++i) {
                const double lam = L.q_eigval[i];
                diag[i] = pref * lam * lam * lam / (r + std::sqrt(2.0) * eps * lam);
            }
            H += L.q_eigvec * diag.asDiagonal() * L.q_eigvec.transpose();
        }
        return H;
    };

    auto plus = [&L, quartic_a, separation_r, eps, anh](double t, const ModeMoments& other) {
        MatrixXd H = 0.5 * L.p2 + 0.5 * L.q2;  // constant-w+ constraint holds by design
        if (anh) {
            const double a = quartic_a(t);
            const double r = separation_r(t);
            H += (3.0 * std::sqrt(2.0) * a * r * eps * other.q) * L.q2;
            H += (0.5 * a * eps * eps) * (L.q4 + 6.0 * other.q2 * L.q2);
        }
        return H;
    };

    return {minus, plus};
}

// ---------------------------------------------------------------------------
// Beam-splitter experiment
// ---------------------------------------------------------------------------

struct BsExperimentOptions {
    int n_cut = 48;
    double eps = 0.0035729;
    CoulombConvention convention = CoulombConvention::Derived;
    bool anharmonic = true;
    bool mean_field_dynamic = true;
    double theta_target = 0.5 * pi;
    double dt_init = 4e-3;
    double conv_tol = 2e-5;
    int max_halvings = 5;
    double norm_tol = 1e-8;
    double tail_tol = 1e-6;
};

namespace detail {

struct BsRunOutput {
    double fidelity = 0.0;
    double theta_achieved = 0.0;
    double norm_drift = 0.0;
};

// One fixed-step co-evolution of (psi+, psi-, phase probe). The probe
// shares the breathing-mode Hamiltonian, whose mean-field input is the
// centre-of-mass state, so it measures exactly the phase the main run sees.
inline BsRunOutput bs_co_evolve(const Ladders& L, const BsHamiltonians& ham, double t0,
                                double t1, double dt, int n_plus, int n_minus, int n_probe,
                                bool mean_field_dynamic, double theta_target, double norm_tol,
                                double tail_tol) {
    VectorXcd psi_p = fock_basis_state(L.n_cut, n_plus);
    VectorXcd psi_m = fock_basis_state(L.n_cut, n_minus);
    VectorXcd probe = (fock_basis_state(L.n_cut, 0) + fock_basis_state(L.n_cut, n_probe)) /
                      std::sqrt(2.0);

    const auto n_steps = static_cast<long>(std::ceil((t1 - t0) / dt));
    const double h = (t1 - t0) / static_cast<double>(n_steps);

    RealStepper step_m(L.n_cut), step_p(L.n_cut);
    std::vector<VectorXcd*> minus_states = {&psi_m, &probe};
    std::vector<VectorXcd*> plus_states = {&psi_p};

    ModeMoments mom_p{0.0, expect_real(L.q2, psi_p)};
    ModeMoments mom_m{expect_real(L.q, psi_m), expect_real(L.q2, psi_m)};
    const ModeMoments mom_p0 = mom_p, mom_m0 = mom_m;

    for (long i = 0; i < n_steps; ++i) {
        const double tm = t0 + (static_cast<double>(i) + 0.5) * h;
        if (mean_field_dynamic) {
            mom_p = ModeMoments{0.0, expect_real(L.q2, psi_p)};
            mom_m = ModeMoments{expect_real(L.q, psi_m), expect_real(L.q2, psi_m)};
        } else {
            mom_p = mom_p0;
            mom_m = mom_m0;
        }
        step_m.apply(ham.minus(tm, mom_p), h, minus_states);
        step_p.apply(ham.plus(tm, mom_m), h, plus_states);
        if ((i & 63) == 0) {
            if (tail_mass(psi_m) > tail_tol || tail_mass(psi_p) > tail_tol)
                throw CutoffError("bs experiment: tail mass gate tripped");
        }
    }

    BsRunOutput out;
    out.norm_drift = std::max(std::abs(psi_m.norm() - 1.0), std::abs(psi_p.norm() - 1.0));
    if (out.norm_drift > norm_tol) throw StepError("bs experiment: norm drift");
    out.fidelity = std::norm(psi_p[n_plus]) * std::norm(psi_m[n_minus]);
    const double T = t1 - t0;
    const double arg_diff = std::arg(probe[n_probe]) - std::arg(probe[0]);
    const double theta_raw = -(arg_diff + n_probe * T) / n_probe;
    out.theta_achieved = theta_target + wrap_angle(theta_raw - theta_target);
    return out;
}

}  // namespace detail

inline ExperimentResult run_bs_experiment(double sigma_sq, int n_plus, int n_minus,
                                          double pickup = 50.0,
                                          const BsExperimentOptions& opt = {}) {
    const int n_gate = std::max(n_plus, n_minus);
    if (n_gate < 0 || opt.n_cut < 4 * std::max(1, n_gate))
        throw DimensionError("run_bs_experiment: need n_cut >= 4 n_gate");

    BeamSplitterOptions bso;
    bso.convention = opt.convention;
    const auto design = design_beam_splitter(opt.theta_target, std::sqrt(sigma_sq), pickup, bso);

    const Ladders L = build_ladders(opt.n_cut);
    const auto ham = bs_hamiltonians(L, design.schedule.a,
                                     [&design](double t) { return design.trajectory.r_at(t); },
                                     design.omega_minus_sq, design.min_separation,
                                     {.eps = opt.eps, .anharmonic = opt.anharmonic});

    const int n_probe = std::max(1, n_minus);
    double dt = opt.dt_init;
    auto run = [&](double step) {
        return detail::bs_co_evolve(L, ham, design.schedule.t_start, design.schedule.t_end,
                                    step, n_plus, n_minus, n_probe, opt.mean_field_dynamic,
                                    opt.theta_target, opt.norm_tol, opt.tail_tol);
    };
    detail::BsRunOutput prev = run(dt);
    detail::BsRunOutput accepted = prev;
    bool converged = false;
    for (int level = 0; level < opt.max_halvings; ++level) {
        dt *= 0.5;
        const detail::BsRunOutput cur = run(dt);
        if (std::abs(cur.fidelity - prev.fidelity) < opt.conv_tol &&
            std::abs(cur.theta_achieved - prev.theta_achieved) < opt.conv_tol) {
            accepted = cur;
            converged = true;
            break;
        }
        prev = cur;
        accepted = cur;
    }
    if (!converged && opt.max_halvings > 0)
        throw StepError("run_bs_experiment: step halving did not converge");

    ExperimentResult res;
    res.fidelity = accepted.fidelity;
    res.theta_achieved = accepted.theta_achieved;
    res.phase_error = std::abs(wrap_angle(accepted.theta_achieved - opt.theta_target));
    res.duration = design.duration;
    res.min_separation = design.min_separation;
    res.norm_drift = accepted.norm_drift;
    return res;
}

// ---------------------------------------------------------------------------
// Separation experiment
// ---------------------------------------------------------------------------

struct SeparationExperimentOptions {
    int n_cut = 32;
    double eps = 0.0035729;
    CoulombConvention convention = CoulombConvention::Derived;
    bool anharmonic = true;
    double separation_factor = 100.0;  // final separation over initial
    double dt_init = 2e-3;
    double conv_tol = 1e-6;
    int max_halvings = 5;
    double tail_tol = 1e-6;
};

namespace detail {

struct SepRunOutput {
    double exc_plus = 0.0;
    double exc_minus = 0.0;
    double fid = 1.0;
};

inline SepRunOutput sep_co_evolve(const Ladders& L, const BsHamiltonians& ham,
                                  const SeparationDesign& design, double dt, double tail_tol) {
    VectorXcd psi_m = harmonic_ground_state(L, std::sqrt(3.0));
    VectorXcd psi_p = fock_basis_state(L.n_cut, 0);

    const double t0 = design.schedule.t_start, t1 = design.schedule.t_end;
    const auto n_steps = static_cast<long>(std::ceil((t1 - t0) / dt));
    const double h = (t1 - t0) / static_cast<double>(n_steps);

    RealStepper step_m(L.n_cut), step_p(L.n_cut);
    std::vector<VectorXcd*> ms = {&psi_m};
    std::vector<VectorXcd*> ps = {&psi_p};

    for (long i = 0; i < n_steps; ++i) {
        const double tm = t0 + (static_cast<double>(i) + 0.5) * h;
        const ModeMoments mom_p{0.0, expect_real(L.q2, psi_p)};
        const ModeMoments mom_m{expect_real(L.q, psi_m), expect_real(L.q2, psi_m)};
        step_m.apply(ham.minus(tm, mom_p), h, ms);
        step_p.apply(ham.plus(tm, mom_m), h, ps);
        if ((i & 63) == 0 && (tail_mass(psi_m) > tail_tol || tail_mass(psi_p) > tail_tol))
            throw CutoffError("separation experiment: tail mass gate tripped");
    }

    SepRunOutput out;
    const double w_end = std::sqrt(design.omega_minus_sq(t1));
    out.exc_minus = occupation_in_frame(L, psi_m, w_end);
    out.exc_plus = occupation_in_frame(L, psi_p, 1.0);
    const VectorXcd g_end = harmonic_ground_state(L, w_end);
    out.fid = std::norm(g_end.dot(psi_m)) * std::norm(psi_p[0]);
    return out;
}

}  // namespace detail

inline ExperimentResult run_separation_experiment(double sigma,
                                                  const SeparationExperimentOptions& opt = {}) {
    if (!(sigma > 0)) throw ConfigError("run_separation_experiment: sigma must be positive");

    const double cc = coulomb_gap_const(opt.convention);
    const double r0 = std::cbrt(cc / 2.0);  // breathing ground configuration
    SeparationOptions so;
    so.convention = opt.convention;
    const auto design = design_separation(sigma, opt.separation_factor * r0, so);

    const Ladders L = build_ladders(opt.n_cut);
    const auto ham = bs_hamiltonians(L, design.schedule.a,
                                     [&design](double t) { return design.trajectory.r_at(t); },
                                     design.omega_minus_sq, design.initial_separation,
                                     {.eps = opt.eps, .anharmonic = opt.anharmonic});

    double dt = opt.dt_init;
    detail::SepRunOutput prev = detail::sep_co_evolve(L, ham, design, dt, opt.tail_tol);
    detail::SepRunOutput accepted = prev;
    bool converged = false;
    for (int level = 0; level < opt.max_halvings; ++level) {
        dt *= 0.5;
        const detail::SepRunOutput cur = detail::sep_co_evolve(L, ham, design, dt, opt.tail_tol);
        if (std::abs(cur.exc_minus - prev.exc_minus) < opt.conv_tol &&
            std::abs(cur.exc_plus - prev.exc_plus) < opt.conv_tol) {
            accepted = cur;
            converged = true;
            break;
        }
        prev = cur;
        accepted = cur;
    }
    if (!converged) throw StepError("run_separation_experiment: step halving did not converge");

    ExperimentResult res;
    res.fidelity = std::min(1.0, accepted.fid);
    res.duration = design.duration;
    res.min_separation = design.initial_separation;
    res.excitation_plus = accepted.exc_plus;
    res.excitation_minus = accepted.exc_minus;
    res.excitation_quanta = std::max(accepted.exc_plus, accepted.exc_minus);
    return res;
}

// ---------------------------------------------------------------------------
// Quartic gate: full interaction-picture evolution vs the resonant part
// ---------------------------------------------------------------------------

struct RwaStudyResult {
    double worst_infidelity = 0.0;
    std::vector<double> per_level;
    double metric = 0.0;  // n_max^2 mu / T
};

struct RwaStudyOptions {
    int n_cut = 0;  // 0 = 4 n_max + 16
    double dt_init = 5e-3;
    double conv_tol = 1e-8;
    int max_halvings = 6;
};

inline RwaStudyResult quartic_rwa_study(double mu, double T, int n_max,
                                        const RwaStudyOptions& opt = {}) {
    if (n_max < 0 || !(T > 0)) throw ConfigError("quartic_rwa_study: bad arguments");
    const int n_cut = opt.n_cut > 0 ? opt.n_cut : 4 * std::max(1, n_max) + 16;
    if (n_cut < 4 * std::max(1, n_max))
        throw DimensionError("quartic_rwa_study: need n_cut >= 4 n_max");

    const Ladders L = build_ladders(n_cut);
    const MatrixXd I = MatrixXd::Identity(n_cut, n_cut);
    MatrixXd M0 = MatrixXd::Zero(n_cut, n_cut);
    for (int n = 0; n < n_cut; ++n) M0(n, n) = 6.0 * n * (n - 1.0) + 12.0 * n + 3.0;
    const MatrixXd ada = 0.5 * (L.q2 + L.p2 - I);
    const MatrixXd M2 = L.adag * L.adag * (4.0 * ada + 6.0 * I);
    const MatrixXd M4 = L.adag * L.adag * L.adag * L.adag;

    auto envelope = [mu, T](double t) { return mu / T * (1.0 - std::cos(2.0 * pi * t / T)); };
    auto H_full = [&](double t) {
        const cplx e2 = std::exp(2.0 * iu * t);
        const cplx e4 = std::exp(4.0 * iu * t);
        MatrixXcd H = M0.cast<cplx>();
        H += e2 * M2.cast<cplx>() + std::conj(e2) * M2.transpose().cast<cplx>();
        H += e4 * M4.cast<cplx>() + std::conj(e4) * M4.transpose().cast<cplx>();
        return MatrixXcd(envelope(t) * H);
    };

    auto run = [&](double dt) {
        std::vector<VectorXcd> states;
        for (int n = 0; n <= n_max; ++n) states.push_back(fock_basis_state(n_cut, n));
        ComplexStepper stepper;
        const auto n_steps = static_cast<long>(std::ceil(T / dt));
        const double h = T / static_cast<double>(n_steps);
        for (long i = 0; i < n_steps; ++i) {
            const double tm = (static_cast<double>(i) + 0.5) * h;
            const MatrixXcd H = H_full(tm);
            // one decomposition, applied to every level
            Eigen::SelfAdjointEigenSolver<MatrixXcd> es(H);
            const MatrixXcd& U = es.eigenvectors();
            const VectorXd& lam = es.eigenvalues();
            VectorXcd phases(n_cut);
            for (int j = 0; j < n_cut; ++j) phases[j] = std::exp(-iu * lam[j] * h);
            for (auto& psi : states) {
                VectorXcd c = U.adjoint() * psi;
                c.array() *= phases.array();
                psi = U * c;
            }
        }
        std::vector<double> infid(static_cast<std::size_t>(n_max) + 1);
        for (int n = 0; n <= n_max; ++n)
            infid[static_cast<std::size_t>(n)] =
                std::max(0.0, 1.0 - std::norm(states[static_cast<std::size_t>(n)][n]));
        return infid;
    };

    double dt = opt.dt_init;
    std::vector<double> prev = run(dt);
    for (int level = 0; level < opt.max_halvings; ++level) {
        dt *= 0.5;
        std::vector<double> cur = run(dt);
        double diff = 0.0;
        for (std::size_t i = 0; i < cur.size(); ++i)
            diff = std::max(diff, std::abs(cur[i] - prev[i]));
        prev = cur;
        if (diff < opt.conv_tol) break;
    }

    RwaStudyResult res;
    res.per_level = prev;
    for (double v : prev) res.worst_infidelity = std::max(res.worst_infidelity, v);
    res.metric = static_cast<double>(n_max) * static_cast<double>(n_max) * std::abs(mu) / T;
    return res;
}

}  // namespace ubs
