#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "kho/model.hpp"
#include "kho/observables.hpp"

namespace kho {

// Number-basis density matrix. Everything here is an independent check on
// the chord-grid pipeline: same model, entirely different representation.
struct FockDensity {
    Eigen::MatrixXcd rho;
    double tau = 0.0;
    long n_kicks = 0;

    int dim() const { return int(rho.rows()); }
    double trace_real() const { return rho.trace().real(); }
    // Population of the top `levels` number states; grows when the basis
    // is too small for the energy reached.
    double tail_weight(int levels = 2) const {
        const int n = dim();
        double s = 0.0;
        for (int i = std::max(0, n - levels); i < n; ++i) s += rho(i, i).real();
        return s;
    }
};

inline FockDensity fock_vacuum(int N) {
    FockDensity f;
    f.rho = Eigen::MatrixXcd::Zero(N, N);
    f.rho(0, 0) = 1.0;
    return f;
}

// |alpha><alpha| with alpha = (x0 + i p0)/sqrt(2).
inline FockDensity fock_coherent(int N, double x0, double p0) {
    const cd alpha = cd(x0, p0) / std::sqrt(2.0);
    Eigen::VectorXcd c(N);
    c(0) = std::exp(-0.5 * std::norm(alpha));
    for (int n = 1; n < N; ++n) c(n) = c(n - 1) * alpha / std::sqrt(double(n));
    FockDensity f;
    f.rho = c * c.adjoint();
    return f;
}

// Ladder-built operators and the two halves of the drift generator. The
// right factor carries +i (beta/2) p x (not x p); with x p on both sides the
// anticommutator miscounts and the trace decays at rate beta/2.
struct FockOps {
    int N = 0;
    double beta = 0.0, D = 0.0;
    Eigen::MatrixXcd x, p, H, GL, GR, xp_sym, U_kick;

    FockOps(int N_, const ModelParams& mp) : N(N_), beta(mp.beta), D(mp.D) {
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(N, N);
        for (int n = 1; n < N; ++n) a(n - 1, n) = std::sqrt(double(n));
        const Eigen::MatrixXd at = a.transpose();
        x = ((a + at) / std::sqrt(2.0)).cast<cd>();
        p = (cd(0, 1) / std::sqrt(2.0)) * (at - a).cast<cd>();
        H = (x * x + p * p) / 2.0;
        const Eigen::MatrixXcd xp = x * p, px = p * x, x2 = x * x;
        GL = cd(0, -1) * H - cd(0, 1) * (beta / 2.0) * xp - beta * D * x2;
        GR = cd(0, 1) * H + cd(0, 1) * (beta / 2.0) * px - beta * D * x2;
        xp_sym = (xp + px) / 2.0;

        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(x);
        const Eigen::VectorXd xi = es.eigenvalues();
        const Eigen::MatrixXcd& V = es.eigenvectors();
        Eigen::VectorXcd ph(N);
        for (int i = 0; i < N; ++i)
            ph(i) = std::polar(1.0, -mp.kick_amplitude() *
                                        std::cos(std::sqrt(2.0) * mp.eta * xi(i)));
        U_kick = V * ph.asDiagonal() * V.adjoint();
    }

    Eigen::MatrixXcd rhs(const Eigen::MatrixXcd& r) const {
        return GL * r + r * GR - cd(0, 1) * (beta / 2.0) * (x * r * p - p * r * x) +
               2.0 * beta * D * (x * r * x);
    }
};

// Fixed-step RK4 on the master equation, re-hermitized each step. Throws
// when probability piles up at the top of the basis.
inline void evolve_master(FockDensity& f, double sigma, const FockOps& ops,
                          double dt_max = 1e-3, double tail_tol = 1e-6) {
    if (!(sigma >= 0.0)) throw ValidationError("evolve_master: sigma must be >= 0");
    if (sigma == 0.0) return;
    const int nst = int(std::ceil(sigma / dt_max));
    const double dt = sigma / nst;
    Eigen::MatrixXcd r = f.rho;
    for (int st = 0; st < nst; ++st) {
        const Eigen::MatrixXcd k1 = ops.rhs(r);
        const Eigen::MatrixXcd k2 = ops.rhs(r + (0.5 * dt) * k1);
        const Eigen::MatrixXcd k3 = ops.rhs(r + (0.5 * dt) * k2);
        const Eigen::MatrixXcd k4 = ops.rhs(r + dt * k3);
        r += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        r = 0.5 * (r + r.adjoint()).eval();
    }
    f.rho = std::move(r);
    f.tau += sigma;
    if (f.tail_weight() > tail_tol)
        throw TruncationError("number basis too small: tail weight " +
                              std::to_string(f.tail_weight()) + " at tau = " +
                              std::to_string(f.tau));
}

inline void evolve_master(FockDensity& f, double sigma, const ModelParams& mp,
                          double dt_max = 1e-3) {
    evolve_master(f, sigma, FockOps(f.dim(), mp), dt_max);
}

inline void apply_kick_fock(FockDensity& f, const FockOps& ops) {
    f.rho = (ops.U_kick * f.rho * ops.U_kick.adjoint()).eval();
    f.n_kicks += 1;
}

inline void apply_kick_fock(FockDensity& f, const ModelParams& mp) {
    apply_kick_fock(f, FockOps(f.dim(), mp));
}

// w(k, s) = Tr[rho e^{i(k x + s p)}] by diagonalizing the Hermitian exponent.
inline cd chord_of_fock(const FockDensity& f, double k, double s) {
    const int N = f.dim();
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(N, N);
    for (int n = 1; n < N; ++n) a(n - 1, n) = std::sqrt(double(n));
    const Eigen::MatrixXcd x = (a + a.adjoint()) / std::sqrt(2.0);
    const Eigen::MatrixXcd p = cd(0, 1) * (a.adjoint() - a) / std::sqrt(2.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(k * x + s * p);
    const Eigen::VectorXd ev = es.eigenvalues();
    const Eigen::MatrixXcd& V = es.eigenvectors();
    Eigen::VectorXcd ph(N);
    for (int i = 0; i < N; ++i) ph(i) = std::polar(1.0, ev(i));
    const Eigen::MatrixXcd U = V * ph.asDiagonal() * V.adjoint();
    return (f.rho * U).trace();
}

inline MomentSet fock_moments(const FockDensity& f, const FockOps& ops) {
    MomentSet m;
    m.mean_x = (f.rho * ops.x).trace().real();
    m.mean_p = (f.rho * ops.p).trace().real();
    m.xx = (f.rho * ops.x * ops.x).trace().real();
    m.pp = (f.rho * ops.p * ops.p).trace().real();
    m.xp_sym = (f.rho * ops.xp_sym).trace().real();
    return m;
}

}  // namespace kho
