#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <sstream>
#include <string>
#include <vector>

#include "ubs/errors.hpp"
#include "ubs/fock.hpp"
#include "ubs/gaussian.hpp"
#include "ubs/util.hpp"

// Gate-level composition: circuit ops over either the Gaussian backend
// (linear gates) or the multi-mode Fock backend (adds the nonlinear phase
// gate and projective measurements).

namespace ubs {

// ---------------------------------------------------------------------------
// Ops and measurement models
// ---------------------------------------------------------------------------

enum class PvmKind { Threshold, FockProjector, CoherentProjector };

struct PVM {
    PvmKind kind = PvmKind::Threshold;
    int m = 0;
    cplx alpha{};

    // projector onto the positive outcome, in a truncated single-mode basis
    MatrixXcd positive(int n_cut) const {
        MatrixXcd P = MatrixXcd::Zero(n_cut, n_cut);
        switch (kind) {
            case PvmKind::Threshold:
                for (int n = 0; n <= m && n < n_cut; ++n) P(n, n) = 1.0;
                break;
            case PvmKind::FockProjector:
                if (m < n_cut) P(m, m) = 1.0;
                break;
            case PvmKind::CoherentProjector: {
                VectorXcd v = coherent_state(n_cut, alpha);
                v.normalize();  // exact idempotence in the truncated space
                P = v * v.adjoint();
                break;
            }
        }
        return P;
    }

    MatrixXcd negative(int n_cut) const {
        return MatrixXcd::Identity(n_cut, n_cut) - positive(n_cut);
    }
};

enum class OpKind { Displace, Phase, Squeeze, BeamSplit, NonlinearPhase, Measure };

struct CircuitOp {
    OpKind kind = OpKind::Phase;
    int mode = 0;
    int mode_j = 0;  // beam splitter partner
    cplx alpha{};    // displacement
    double phi = 0.0;
    cplx g{};        // squeeze
    double theta = 0.0;
    double mu = 0.0;
    PVM pvm{};

    bool linear() const {
        return kind == OpKind::Displace || kind == OpKind::Phase || kind == OpKind::Squeeze ||
               kind == OpKind::BeamSplit;
    }

    static CircuitOp displace(int mode, cplx a) {
        CircuitOp o;
        o.kind = OpKind::Displace;
        o.mode = mode;
        o.alpha = a;
        return o;
    }
    static CircuitOp phase(int mode, double phi) {
        CircuitOp o;
        o.kind = OpKind::Phase;
        o.mode = mode;
        o.phi = phi;
        return o;
    }
    static CircuitOp squeeze(int mode, cplx g) {
        CircuitOp o;
        o.kind = OpKind::Squeeze;
        o.mode = mode;
        o.g = g;
        return o;
    }
    static CircuitOp beam_split(int i, int j, double theta, double phi) {
        CircuitOp o;
        o.kind = OpKind::BeamSplit;
        o.mode = i;
        o.mode_j = j;
        o.theta = theta;
        o.phi = phi;
        return o;
    }
    static CircuitOp nonlinear(int mode, double mu) {
        CircuitOp o;
        o.kind = OpKind::NonlinearPhase;
        o.mode = mode;
        o.mu = mu;
        return o;
    }
    static CircuitOp measure(int mode, PVM pvm) {
        CircuitOp o;
        o.kind = OpKind::Measure;
        o.mode = mode;
        o.pvm = pvm;
        return o;
    }
};

inline void apply_gaussian(GaussianState& s, const CircuitOp& op) {
    if (!op.linear())
        throw UnsupportedOpError("apply_gaussian: nonlinear op on the Gaussian backend");
    if (op.mode < 0 || op.mode >= s.modes ||
        (op.kind == OpKind::BeamSplit && (op.mode_j < 0 || op.mode_j >= s.modes)))
        throw DimensionError("apply_gaussian: mode index out of range");
    switch (op.kind) {
        case OpKind::Displace:
            gaussian_displace(s, op.mode, op.alpha);
            break;
        case OpKind::Phase:
            gaussian_phase(s, op.mode, op.phi);
            break;
        case OpKind::Squeeze:
            gaussian_squeeze(s, op.mode, op.g);
            break;
        case OpKind::BeamSplit:
            gaussian_beam_split(s, op.mode, op.mode_j, op.theta, op.phi);
            break;
        default:
            break;
    }
}

// ---------------------------------------------------------------------------
// Multi-mode Fock backend
// ---------------------------------------------------------------------------

struct MultiModeState {
    int modes = 0;
    int n_cut = 0;
    VectorXcd amps;  // index = sum_k n_k (n_cut)^k, mode 0 fastest

    static MultiModeState vacuum(int modes, int n_cut) {
        if (modes < 1 || modes > 3 || n_cut < 2 || n_cut > 24)
            throw DimensionError("MultiModeState: backend limited to 3 modes at n_cut <= 24");
        MultiModeState s;
        s.modes = modes;
        s.n_cut = n_cut;
        long dim = 1;
        for (int m = 0; m < modes; ++m) dim *= n_cut;
        s.amps = VectorXcd::Zero(dim);
        s.amps[0] = 1.0;
        return s;
    }

    long stride(int mode) const {
        long st = 1;
        for (int m = 0; m < mode; ++m) st *= n_cut;
        return st;
    }
};

namespace detail {

// Apply a single-mode operator U to one mode of the product state.
inline void apply_single_mode(MultiModeState& s, const MatrixXcd& U, int mode) {
    const int N = s.n_cut;
    const long st = s.stride(mode);
    const long dim = s.amps.size();
    const long block = st * N;
    VectorXcd tmp(N);
    for (long base = 0; base < dim; base += block) {
        for (long off = 0; off < st; ++off) {
            for (int n = 0; n < N; ++n) tmp[n] = s.amps[base + off + st * n];
            VectorXcd res = U * tmp;
            for (int n = 0; n < N; ++n) s.amps[base + off + st * n] = res[n];
        }
    }
}

// Apply a two-mode operator U (dimension N^2, index n_i + N n_j) to modes i, j.
inline void apply_two_mode(MultiModeState& s, const MatrixXcd& U, int mi, int mj) {
    const int N = s.n_cut;
    const long si = s.stride(mi), sj = s.stride(mj);
    const long dim = s.amps.size();
    VectorXcd tmp(N * N), res(N * N);
    std::vector<long> rest_bases;
    for (long idx = 0; idx < dim; ++idx) {
        const long ni = (idx / si) % N;
        const long nj = (idx / sj) % N;
        if (ni == 0 && nj == 0) rest_bases.push_back(idx);
    }
    for (long base : rest_bases) {
        for (int a = 0; a < N; ++a)
            for (int b = 0; b < N; ++b) tmp[a + N * b] = s.amps[base + si * a + sj * b];
        res = U * tmp;
        for (int a = 0; a < N; ++a)
            for (int b = 0; b < N; ++b) s.amps[base + si * a + sj * b] = res[a + N * b];
    }
}

inline MatrixXcd unitary_from_hermitian(const MatrixXcd& H) {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(H);
    const MatrixXcd& U = es.eigenvectors();
    VectorXcd ph(es.eigenvalues().size());
    for (int i = 0; i < ph.size(); ++i) ph[i] = std::exp(-iu * es.eigenvalues()[i]);
    return U * ph.asDiagonal() * U.adjoint();
}

}  // namespace detail

// Single-mode gate unitaries in the truncated basis.
inline MatrixXcd displacement_unitary(const Ladders& L, cplx alpha) {
    const MatrixXcd H =
        iu * (alpha * L.adag.cast<cplx>() - std::conj(alpha) * L.a.cast<cplx>());
    return detail::unitary_from_hermitian(H);
}

inline MatrixXcd squeeze_unitary(const Ladders& L, cplx g) {
    const MatrixXcd a2 = (L.a * L.a).cast<cplx>();
    const MatrixXcd H = iu * 0.5 * (std::conj(g) * a2 - g * a2.adjoint());
    return detail::unitary_from_hermitian(H);
}

inline MatrixXcd phase_unitary(int n_cut, double phi) {
    MatrixXcd U = MatrixXcd::Zero(n_cut, n_cut);
    for (int n = 0; n < n_cut; ++n) U(n, n) = std::exp(-iu * phi * static_cast<double>(n));
    return U;
}

inline MatrixXcd nonlinear_phase_unitary(int n_cut, double mu) {
    MatrixXcd U = MatrixXcd::Zero(n_cut, n_cut);
    for (int n = 0; n < n_cut; ++n)
        U(n, n) = std::exp(-iu * mu * (6.0 * n * (n - 1.0) + 12.0 * n));
    return U;
}

// Two-mode mixer exp(i (theta/2)(e^{i phi} a_i^dag a_j + h.c.)), index n_i + N n_j.
inline MatrixXcd beam_splitter_unitary(const Ladders& L, double theta, double phi) {
    const int N = L.n_cut;
    MatrixXcd G = MatrixXcd::Zero(N * N, N * N);
    const cplx c = -(theta / 2.0) * std::exp(iu * phi);
    // H = -(theta/2)(e^{i phi} a_i^dag a_j + e^{-i phi} a_i a_j^dag)
    for (int ni = 0; ni + 1 < N; ++ni)
        for (int nj = 1; nj < N; ++nj) {
            const double amp = std::sqrt(static_cast<double>(ni + 1)) *
                               std::sqrt(static_cast<double>(nj));
            G((ni + 1) + N * (nj - 1), ni + N * nj) = c * amp;
        }
    MatrixXcd H = G + G.adjoint();
    return detail::unitary_from_hermitian(H);
}

struct MeasureOutcome {
    double p_positive = 0.0;
    MultiModeState post_positive;
    MultiModeState post_negative;
};

// Deterministic application of a circuit op on the Fock backend. Measurement
// returns both branches with probabilities and renormalized post-states.
inline MeasureOutcome apply_measure(const MultiModeState& s, int mode, const PVM& pvm) {
    MeasureOutcome out;
    const MatrixXcd P = pvm.positive(s.n_cut);
    MultiModeState pos = s, neg = s;
    detail::apply_single_mode(pos, P, mode);
    detail::apply_single_mode(neg, MatrixXcd(MatrixXcd::Identity(s.n_cut, s.n_cut) - P), mode);
    const double pp = pos.amps.squaredNorm();
    const double pn = neg.amps.squaredNorm();
    out.p_positive = pp;
    if (pp > 1e-300) pos.amps /= std::sqrt(pp);
    if (pn > 1e-300) neg.amps /= std::sqrt(pn);
    out.post_positive = std::move(pos);
    out.post_negative = std::move(neg);
    // probability bookkeeping: pp + pn need not equal 1 for non-projective P,
    // but PVM projectors satisfy it; callers assert.
    (void)pn;
    return out;
}

inline void apply_fock(MultiModeState& s, const Ladders& L, const CircuitOp& op) {
    if (op.mode < 0 || op.mode >= s.modes) throw DimensionError("apply_fock: bad mode index");
    if (L.n_cut != s.n_cut) throw DimensionError("apply_fock: ladder/state cutoff mismatch");
    switch (op.kind) {
        case OpKind::Displace:
            detail::apply_single_mode(s, displacement_unitary(L, op.alpha), op.mode);
            break;
        case OpKind::Phase:
            detail::apply_single_mode(s, phase_unitary(s.n_cut, op.phi), op.mode);
            break;
        case OpKind::Squeeze:
            detail::apply_single_mode(s, squeeze_unitary(L, op.g), op.mode);
            break;
        case OpKind::NonlinearPhase:
            detail::apply_single_mode(s, nonlinear_phase_unitary(s.n_cut, op.mu), op.mode);
            break;
        case OpKind::BeamSplit: {
            if (op.mode_j < 0 || op.mode_j >= s.modes || op.mode_j == op.mode)
                throw DimensionError("apply_fock: bad beam splitter modes");
            detail::apply_two_mode(s, beam_splitter_unitary(L, op.theta, op.phi), op.mode,
                                   op.mode_j);
            break;
        }
        case OpKind::Measure:
            throw UnsupportedOpError("apply_fock: use apply_measure for measurement branches");
    }
}

// ---------------------------------------------------------------------------
// Commutator concatenation
// ---------------------------------------------------------------------------

inline double operator_norm(const MatrixXcd& M) {
    Eigen::JacobiSVD<MatrixXcd> svd(M);
    return svd.singularValues()(0);
}

// (e^{iY dt} e^{iZ dt} e^{-iY dt} e^{-iZ dt})^reps
inline MatrixXcd concatenate_commutator(const MatrixXcd& Y, const MatrixXcd& Z, double dt,
                                        int reps) {
    if (hermiticity_defect(Y) > 1e-12 || hermiticity_defect(Z) > 1e-12)
        throw DomainError("concatenate_commutator: generators must be Hermitian");
    const MatrixXcd Uy = detail::unitary_from_hermitian(MatrixXcd(-dt * Y));
    const MatrixXcd Uz = detail::unitary_from_hermitian(MatrixXcd(-dt * Z));
    const MatrixXcd cycle = Uy * Uz * Uy.adjoint() * Uz.adjoint();
    MatrixXcd out = MatrixXcd::Identity(Y.rows(), Y.cols());
    for (int i = 0; i < reps; ++i) out = cycle * out;
    return out;
}

// Error of the concatenation against its target evolution e^{i [Y,Z] reps dt^2}.
inline double commutator_concatenation_error(const MatrixXcd& Y, const MatrixXcd& Z, double dt,
                                             int reps) {
    const MatrixXcd approx = concatenate_commutator(Y, Z, dt, reps);
    const MatrixXcd C = Y * Z - Z * Y;  // anti-Hermitian times i: i[Y,Z] Hermitian gen
    const MatrixXcd H = iu * C;        // e^{i[Y,Z]s} = e^{-i(-iC)s}... keep direct route
    // target = exp(i [Y,Z] reps dt^2) = exp(-i * (-[Y,Z] i) ...) : use eig of iC
    const MatrixXcd target =
        detail::unitary_from_hermitian(MatrixXcd(-static_cast<double>(reps) * dt * dt * H));
    return operator_norm(approx - target);
}

// ---------------------------------------------------------------------------
// Dual-backend cross validation
// ---------------------------------------------------------------------------

struct CrossValidation {
    double max_mean_diff = 0.0;
    double max_cov_diff = 0.0;
};

// Run a linear circuit from vacuum on both backends and compare first and
// second quadrature moments.
inline CrossValidation cross_validate(const std::vector<CircuitOp>& ops, int modes,
                                      int n_cut = 20) {
    for (const auto& op : ops)
        if (!op.linear()) throw UnsupportedOpError("cross_validate: linear circuits only");

    GaussianState g = GaussianState::vacuum(modes);
    for (const auto& op : ops) apply_gaussian(g, op);

    const Ladders L = build_ladders(n_cut);
    MultiModeState f = MultiModeState::vacuum(modes, n_cut);
    for (const auto& op : ops) apply_fock(f, L, op);

    // quadrature vectors R_k |psi>
    std::vector<VectorXcd> rpsi(2 * static_cast<std::size_t>(modes));
    const MatrixXcd qc = L.q.cast<cplx>();
    const MatrixXcd pc = L.p;
    for (int m = 0; m < modes; ++m) {
        MultiModeState sq = f, sp = f;
        detail::apply_single_mode(sq, qc, m);
        detail::apply_single_mode(sp, pc, m);
        rpsi[2 * m] = sq.amps;
        rpsi[2 * m + 1] = sp.amps;
    }

    CrossValidation out;
    VectorXd mean(2 * modes);
    for (int k = 0; k < 2 * modes; ++k) {
        mean[k] = f.amps.dot(rpsi[static_cast<std::size_t>(k)]).real();
        out.max_mean_diff = std::max(out.max_mean_diff, std::abs(mean[k] - g.mean[k]));
    }
    for (int a = 0; a < 2 * modes; ++a)
        for (int b = 0; b < 2 * modes; ++b) {
            const double sym =
                (rpsi[static_cast<std::size_t>(a)].dot(rpsi[static_cast<std::size_t>(b)]))
                    .real();
            const double cov = sym - mean[a] * mean[b];
            out.max_cov_diff = std::max(out.max_cov_diff, std::abs(cov - g.cov(a, b)));
        }
    return out;
}

// ---------------------------------------------------------------------------
// Circuit description files: one op per line, e.g.
//   D 0 re=0.3 im=-0.1
//   P 1 phi=0.7853981633974483
//   S 0 re=0.25 im=0
//   BS 0 1 theta=1.5708 phi=0
//   NL 2 mu=0.2617993877991494
//   M 0 kind=threshold m=0
// '#' starts a comment.
// ---------------------------------------------------------------------------

inline std::vector<CircuitOp> parse_circuit(std::istream& in) {
    std::vector<CircuitOp> ops;
    std::string line;
    int lineno = 0;
    auto need = [&](bool ok, const std::string& what) {
        if (!ok)
            throw ConfigError("circuit line " + std::to_string(lineno) + ": " + what);
    };
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::istringstream ss(line);
        std::string tok;
        if (!(ss >> tok)) continue;

        auto kv = [&](const std::string& key) {
            std::string t;
            need(static_cast<bool>(ss >> t), "missing parameter " + key);
            const auto eq = t.find('=');
            need(eq != std::string::npos && t.substr(0, eq) == key,
                 "expected " + key + "=<value>, got '" + t + "'");
            try {
                return std::stod(t.substr(eq + 1));
            } catch (...) {
                throw ConfigError("circuit line " + std::to_string(lineno) +
                                  ": bad number in '" + t + "'");
            }
        };
        auto mode_idx = [&]() {
            int m;
            need(static_cast<bool>(ss >> m), "missing mode index");
            return m;
        };

        if (tok == "D") {
            const int m = mode_idx();
            const double re = kv("re"), im = kv("im");
            ops.push_back(CircuitOp::displace(m, {re, im}));
        } else if (tok == "P") {
            const int m = mode_idx();
            ops.push_back(CircuitOp::phase(m, kv("phi")));
        } else if (tok == "S") {
            const int m = mode_idx();
            const double re = kv("re"), im = kv("im");
            ops.push_back(CircuitOp::squeeze(m, {re, im}));
        } else if (tok == "BS") {
            const int mi = mode_idx();
            const int mj = mode_idx();
            const double theta = kv("theta"), phi = kv("phi");
            ops.push_back(CircuitOp::beam_split(mi, mj, theta, phi));
        } else if (tok == "NL") {
            const int m = mode_idx();
            ops.push_back(CircuitOp::nonlinear(m, kv("mu")));
        } else if (tok == "M") {
            const int m = mode_idx();
            std::string t;
            need(static_cast<bool>(ss >> t), "missing kind=");
            const auto eq = t.find('=');
            need(eq != std::string::npos && t.substr(0, eq) == "kind", "expected kind=");
            const std::string kind = t.substr(eq + 1);
            PVM pvm;
            if (kind == "threshold") {
                pvm.kind = PvmKind::Threshold;
                pvm.m = static_cast<int>(kv("m"));
            } else if (kind == "fock") {
                pvm.kind = PvmKind::FockProjector;
                pvm.m = static_cast<int>(kv("m"));
            } else if (kind == "coherent") {
                pvm.kind = PvmKind::CoherentProjector;
                const double re = kv("re"), im = kv("im");
                pvm.alpha = {re, im};
            } else {
                need(false, "unknown measurement kind '" + kind + "'");
            }
            ops.push_back(CircuitOp::measure(m, pvm));
        } else {
            need(false, "unknown op '" + tok + "'");
        }
        std::string extra;
        if (ss >> extra) need(false, "trailing token '" + extra + "'");
    }
    return ops;
}

}  // namespace ubs
