#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>

#include "ubs/errors.hpp"
#include "ubs/lr.hpp"
#include "ubs/util.hpp"

// Gaussian backend: means and covariances of quadratures (q1,p1,q2,p2,...)
// updated by the symplectic matrices of the linear gates. Vacuum covariance
// is I/2 (hbar = 1).

namespace ubs {

using Eigen::Matrix2d;
using Eigen::MatrixXd;
using Eigen::VectorXd;

struct GaussianState {
    int modes = 0;
    VectorXd mean;
    MatrixXd cov;

    static GaussianState vacuum(int m) {
        GaussianState s;
        s.modes = m;
        s.mean = VectorXd::Zero(2 * m);
        s.cov = 0.5 * MatrixXd::Identity(2 * m, 2 * m);
        return s;
    }
};

inline MatrixXd symplectic_form(int modes) {
    MatrixXd W = MatrixXd::Zero(2 * modes, 2 * modes);
    for (int i = 0; i < modes; ++i) {
        W(2 * i, 2 * i + 1) = 1.0;
        W(2 * i + 1, 2 * i) = -1.0;
    }
    return W;
}

// Real 2x2 action of a -> E a + F a^dag on (q, p).
inline Matrix2d bogoliubov_to_symplectic(cplx E, cplx F) {
    Matrix2d S;
    S << (E + F).real(), (F - E).imag(), (E + F).imag(), (E - F).real();
    return S;
}

inline Matrix2d phase_symplectic(double phi) {
    return bogoliubov_to_symplectic(std::exp(-iu * phi), 0.0);
}

inline Matrix2d squeeze_symplectic(cplx g) {
    const auto gate = LinearGate::squeeze(g);
    return bogoliubov_to_symplectic(gate.E, gate.F);
}

// Beam splitter of Eq. type: a1 -> cos(t/2) a1 + i sin(t/2) e^{i phi} a2,
// a2 -> i sin(t/2) e^{-i phi} a1 + cos(t/2) a2. Passive, so the block form
// follows from the unitary's real and imaginary parts.
inline Eigen::Matrix4d beam_splitter_symplectic(double theta, double phi) {
    const double c = std::cos(0.5 * theta), s = std::sin(0.5 * theta);
    const cplx U11 = c, U22 = c;
    const cplx U12 = iu * s * std::exp(iu * phi);
    const cplx U21 = iu * s * std::exp(-iu * phi);
    Eigen::Matrix4d S;
    auto put = [&](int bi, int bj, cplx u) {
        S(2 * bi, 2 * bj) = u.real();
        S(2 * bi, 2 * bj + 1) = -u.imag();
        S(2 * bi + 1, 2 * bj) = u.imag();
        S(2 * bi + 1, 2 * bj + 1) = u.real();
    };
    put(0, 0, U11);
    put(0, 1, U12);
    put(1, 0, U21);
    put(1, 1, U22);
    return S;
}

inline double symplectic_defect(const MatrixXd& S) {
    const int modes = static_cast<int>(S.rows()) / 2;
    const MatrixXd W = symplectic_form(modes);
    return (S * W * S.transpose() - W).cwiseAbs().maxCoeff();
}

// Smallest eigenvalue of cov + (i/2) W; non-negative for a physical state.
inline double uncertainty_min_eig(const GaussianState& s) {
    Eigen::MatrixXcd M = s.cov.cast<cplx>();
    const MatrixXd W = symplectic_form(s.modes);
    M += 0.5 * iu * W.cast<cplx>();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(M);
    return es.eigenvalues().minCoeff();
}

namespace detail {
inline void embed_single(MatrixXd& S, const Matrix2d& B, int mode) {
    S.block<2, 2>(2 * mode, 2 * mode) = B;
}
}  // namespace detail

inline void gaussian_apply_symplectic(GaussianState& s, const MatrixXd& S) {
    s.mean = S * s.mean;
    s.cov = S * s.cov * S.transpose();
}

inline void gaussian_displace(GaussianState& s, int mode, cplx alpha) {
    s.mean[2 * mode] += std::sqrt(2.0) * alpha.real();
    s.mean[2 * mode + 1] += std::sqrt(2.0) * alpha.imag();
}

inline void gaussian_phase(GaussianState& s, int mode, double phi) {
    MatrixXd S = MatrixXd::Identity(2 * s.modes, 2 * s.modes);
    detail::embed_single(S, phase_symplectic(phi), mode);
    gaussian_apply_symplectic(s, S);
}

inline void gaussian_squeeze(GaussianState& s, int mode, cplx g) {
    MatrixXd S = MatrixXd::Identity(2 * s.modes, 2 * s.modes);
    detail::embed_single(S, squeeze_symplectic(g), mode);
    gaussian_apply_symplectic(s, S);
}

inline void gaussian_beam_split(GaussianState& s, int mode_i, int mode_j, double theta,
                                double phi) {
    if (mode_i == mode_j) throw DimensionError("beam splitter needs two distinct modes");
    const Eigen::Matrix4d B = beam_splitter_symplectic(theta, phi);
    MatrixXd S = MatrixXd::Identity(2 * s.modes, 2 * s.modes);
    const int m[2] = {mode_i, mode_j};
    for (int bi = 0; bi < 2; ++bi)
        for (int bj = 0; bj < 2; ++bj)
            S.block<2, 2>(2 * m[bi], 2 * m[bj]) = B.block<2, 2>(2 * bi, 2 * bj);
    gaussian_apply_symplectic(s, S);
}

}  // namespace ubs
