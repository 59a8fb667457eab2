#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "ubs/errors.hpp"
#include "ubs/util.hpp"

// Truncated Fock-space representation (fixed storage-frequency basis,
// hbar = m = omega0 = 1) and unitary time stepping. Hamiltonians assembled
// from q alone plus p^2/2 are real symmetric; the stepper exploits that.

namespace ubs {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

struct Ladders {
    int n_cut = 0;
    MatrixXd a, adag, q, q2, q3, q4, p2;
    MatrixXcd p;
    // spectral decomposition of q, for matrix functions of position
    VectorXd q_eigval;
    MatrixXd q_eigvec;
};

inline Ladders build_ladders(int n_cut) {
    if (n_cut < 4) throw DimensionError("build_ladders: need n_cut >= 4");
    Ladders L;
    L.n_cut = n_cut;
    L.a = MatrixXd::Zero(n_cut, n_cut);
    for (int n = 1; n < n_cut; ++n) L.a(n - 1, n) = std::sqrt(static_cast<double>(n));
    L.adag = L.a.transpose();
    L.q = (L.a + L.adag) / std::sqrt(2.0);
    L.p = iu * (L.adag - L.a).cast<cplx>() / std::sqrt(2.0);
    L.q2 = L.q * L.q;
    L.q3 = L.q2 * L.q;
    L.q4 = L.q2 * L.q2;
    const MatrixXd d = L.adag - L.a;  // p = i d / sqrt(2), so p^2 = -d^2/2
    L.p2 = -0.5 * (d * d);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(L.q);
    L.q_eigval = es.eigenvalues();
    L.q_eigvec = es.eigenvectors();
    return L;
}

inline VectorXcd fock_basis_state(int n_cut, int n) {
    if (n < 0 || n >= n_cut) throw DimensionError("fock_basis_state: level outside cutoff");
    VectorXcd v = VectorXcd::Zero(n_cut);
    v[n] = 1.0;
    return v;
}

inline VectorXcd coherent_state(int n_cut, cplx alpha) {
    VectorXcd v(n_cut);
    cplx amp = std::exp(-0.5 * std::norm(alpha));
    for (int n = 0; n < n_cut; ++n) {
        v[n] = amp;
        amp *= alpha / std::sqrt(static_cast<double>(n + 1));
    }
    return v;
}

// Ground state of p^2/2 + (w^2/2) q^2 expressed in the storage basis.
inline VectorXcd harmonic_ground_state(const Ladders& L, double omega) {
    MatrixXd H = 0.5 * L.p2 + 0.5 * omega * omega * L.q2;
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(H);
    VectorXd g = es.eigenvectors().col(0);
    if (g[0] < 0) g = -g;  // fix the sign convention
    return g.cast<cplx>();
}

struct Moments {
    double q = 0, p = 0, q2 = 0, p2 = 0, qp_sym = 0, q3 = 0, q4 = 0, n = 0;
};

// Expectation of a real symmetric operator; cross terms cancel, so two real
// mat-vecs suffice.
inline double expect_real(const MatrixXd& O, const VectorXcd& psi) {
    const VectorXd pr = psi.real();
    const VectorXd pi_ = psi.imag();
    return pr.dot(O * pr) + pi_.dot(O * pi_);
}

inline Moments moments_of(const Ladders& L, const VectorXcd& psi) {
    Moments m;
    m.q = expect_real(L.q, psi);
    m.q2 = expect_real(L.q2, psi);
    m.q3 = expect_real(L.q3, psi);
    m.q4 = expect_real(L.q4, psi);
    m.p2 = expect_real(L.p2, psi);
    const VectorXcd ppsi = L.p * psi;
    m.p = psi.dot(ppsi).real();
    // <qp> = <(qp+pq)/2> + i/2, so the symmetrized moment is its real part
    m.qp_sym = (psi.dot(L.q.cast<cplx>() * ppsi)).real();
    for (int n = 0; n < L.n_cut; ++n) m.n += n * std::norm(psi[n]);
    return m;
}

inline double tail_mass(const VectorXcd& psi, double top_fraction = 0.25) {
    const int n = static_cast<int>(psi.size());
    const int start = n - static_cast<int>(std::floor(top_fraction * n));
    double s = 0.0;
    for (int i = start; i < n; ++i) s += std::norm(psi[i]);
    return s;
}

// Occupation of the oscillator at frequency w (the instantaneous frame):
// <a_w^dag a_w> = (w <q^2> + <p^2>/w)/2 - 1/2.
inline double occupation_in_frame(const Ladders& L, const VectorXcd& psi, double omega) {
    const Moments m = moments_of(L, psi);
    return 0.5 * (omega * m.q2 + m.p2 / omega) - 0.5;
}

inline double hermiticity_defect(const MatrixXcd& H) {
    return (H - H.adjoint()).cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------
// Unitary steppers (exact exponential of the midpoint Hamiltonian)
// ---------------------------------------------------------------------------

class RealStepper {
  public:
    explicit RealStepper(int n) : cr_(n), ci_(n), xr_(n), xi_(n) {}

    void apply(const MatrixXd& H, double dt, std::vector<VectorXcd*>& states) {
        es_.compute(H);
        const MatrixXd& V = es_.eigenvectors();
        const VectorXd& lam = es_.eigenvalues();
        const VectorXd c = (lam * dt).array().cos();
        const VectorXd s = (lam * dt).array().sin();
        for (VectorXcd* psi : states) {
            xr_ = V.transpose() * psi->real().matrix();
            xi_ = V.transpose() * psi->imag().matrix();
            cr_ = c.cwiseProduct(xr_) + s.cwiseProduct(xi_);
            ci_ = c.cwiseProduct(xi_) - s.cwiseProduct(xr_);
            psi->real() = V * cr_;
            psi->imag() = V * ci_;
        }
    }

  private:
    Eigen::SelfAdjointEigenSolver<MatrixXd> es_;
    VectorXd cr_, ci_, xr_, xi_;
};

class ComplexStepper {
  public:
    void apply(const MatrixXcd& H, double dt, VectorXcd& psi) {
        es_.compute(H);
        const MatrixXcd& U = es_.eigenvectors();
        const VectorXd& lam = es_.eigenvalues();
        VectorXcd c = U.adjoint() * psi;
        for (int i = 0; i < c.size(); ++i) c[i] *= std::exp(-iu * lam[i] * dt);
        psi = U * c;
    }

  private:
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es_;
};

// ---------------------------------------------------------------------------
// Single-state evolution with step halving
// ---------------------------------------------------------------------------

struct EvolveOptions {
    double dt_init = 2e-3;
    double tol = 1e-7;       // state-vector convergence between halvings
    int max_halvings = 6;
    double norm_tol = 1e-8;
    double tail_tol = 1e-6;
    bool check_hermitian = true;
};

namespace detail {

inline VectorXcd evolve_fixed_complex(const VectorXcd& psi0,
                                      const std::function<MatrixXcd(double)>& H, double t0,
                                      double t1, double dt, const EvolveOptions& opt) {
    VectorXcd psi = psi0;
    ComplexStepper stepper;
    const auto n_steps = static_cast<long>(std::ceil((t1 - t0) / dt));
    const double h = (t1 - t0) / static_cast<double>(n_steps);
    for (long i = 0; i < n_steps; ++i) {
        const double tm = t0 + (static_cast<double>(i) + 0.5) * h;
        MatrixXcd Hm = H(tm);
        if (opt.check_hermitian && i == 0 && hermiticity_defect(Hm) > 1e-12)
            throw DomainError("evolve: Hamiltonian is not Hermitian");
        stepper.apply(Hm, h, psi);
        if ((i & 63) == 0) {
            if (std::abs(psi.norm() - 1.0) > opt.norm_tol)
                throw StepError("evolve: norm drift beyond tolerance");
            if (tail_mass(psi) > opt.tail_tol)
                throw CutoffError("evolve: cutoff tail mass gate tripped");
        }
    }
    return psi;
}

}  // namespace detail

// Midpoint-exponential integration of i psi' = H(t) psi, halving the step
// until the final state stops moving.
inline VectorXcd evolve(const VectorXcd& psi0, const std::function<MatrixXcd(double)>& H,
                        double t0, double t1, const EvolveOptions& opt = {}) {
    if (std::abs(psi0.norm() - 1.0) > 1e-8)
        throw DomainError("evolve: initial state must be normalized");
    double dt = opt.dt_init;
    VectorXcd prev = detail::evolve_fixed_complex(psi0, H, t0, t1, dt, opt);
    for (int level = 0; level < opt.max_halvings; ++level) {
        dt *= 0.5;
        VectorXcd cur = detail::evolve_fixed_complex(psi0, H, t0, t1, dt, opt);
        if ((cur - prev).norm() < opt.tol) {
            if (tail_mass(cur) > opt.tail_tol)
                throw CutoffError("evolve: final tail mass above gate");
            return cur;
        }
        prev = std::move(cur);
    }
    throw StepError("evolve: step halving did not converge");
}

}  // namespace ubs
