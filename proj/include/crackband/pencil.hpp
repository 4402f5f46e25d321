#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "crackband/asymptotics.hpp"
#include "crackband/band_io.hpp"
#include "crackband/cell.hpp"
#include "crackband/cheb.hpp"
#include "crackband/errors.hpp"
#include "crackband/green.hpp"

namespace crackband {

// Discretized window operator at spectral parameter z. `entries` maps
// X_weighted coefficients to Y_plain coefficients; `herm` is the same
// operator in the basis pairing <w_m, K w_n>, Hermitian for real z.
struct PencilMatrix {
    double theta = 0.0;
    double z = 0.0;
    int N = 0;
    double eps = 0.0;
    double E = 0.0;
    Eigen::MatrixXcd entries;
    Eigen::MatrixXcd herm;
    Eigen::VectorXcd uhat; // trace coefficients of u_theta on the window
};

namespace detail {

// <w_m, R w_n> by tensor Chebyshev-Gauss quadrature; R evaluated once per
// node pair (it is symmetric in (y, y') to the bit, so only i <= j).
inline Eigen::MatrixXd smooth_gram(const CellSpec& cell, double theta, double z,
                                   int N, int Q) {
    KernelEvaluator ev(cell, theta, /*subtract_log=*/true, /*subtract_pole=*/true);
    ev.prepare(z);
    const auto s = chebgauss_nodes(Q);
    Eigen::MatrixXd Rg(Q, Q);
    for (int i = 0; i < Q; ++i) {
        for (int j = i; j < Q; ++j) {
            const double v = ev.eval(cell.eps * s[i], cell.eps * s[j]);
            Rg(i, j) = v;
            Rg(j, i) = v;
        }
    }
    Eigen::MatrixXd T(N, Q);
    for (int k = 0; k < N; ++k)
        for (int q = 0; q < Q; ++q)
            T(k, q) = std::cos(k * (2 * q + 1) * kPi / (2.0 * Q));
    const double wq = kPi / Q;
    return (wq * wq) * (T * Rg * T.transpose());
}

} // namespace detail

inline PencilMatrix assemble(const CellSpec& cell, double theta, double z,
                             int N) {
    if (N < 8) throw DomainError("assemble: need N >= 8");
    CellSpec c = cell;
    const double E = mode_eigenvalue(c.H, c.mode);
    const int Q = std::max(48, 2 * N);
    Eigen::MatrixXd BR = detail::smooth_gram(c, theta, z, N, Q);

    PencilMatrix P;
    P.theta = theta;
    P.z = z;
    P.N = N;
    P.eps = c.eps;
    P.E = E;

    auto uh = trace_fit(c, c.mode, theta, N);
    P.uhat = Eigen::VectorXcd(N);
    for (int i = 0; i < N; ++i) P.uhat(i) = uh.c[i];

    // B = Pi c_log Ldiag + BR + q q^* / (E - z), q = Pi uhat.
    Eigen::VectorXd Pi(N);
    for (int n = 0; n < N; ++n) Pi(n) = kPi / cos_weight(n);
    Eigen::MatrixXcd B = BR.cast<Complex>();
    for (int n = 0; n < N; ++n)
        B(n, n) += Pi(n) * kCLog * log_eigenvalue(c.eps, n);
    Eigen::VectorXcd q = Pi.cast<Complex>().asDiagonal() * P.uhat;
    B.noalias() += (q * q.adjoint()) / Complex(E - z);
    P.herm = std::move(B);
    P.entries = Pi.cwiseInverse().cast<Complex>().asDiagonal() * P.herm;
    return P;
}

// Smallest singular value after left-preconditioning by the inverse diagonal
// log part (the bounded-perturbation-of-identity normalization).
inline double min_singular(const PencilMatrix& P) {
    Eigen::MatrixXcd M = P.herm;
    for (int n = 0; n < P.N; ++n) {
        const double d = kPi / cos_weight(n) * kCLog * log_eigenvalue(P.eps, n);
        M.row(n) /= d;
    }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M);
    return svd.singularValues()(P.N - 1);
}

namespace detail {

// Smallest eigenvalue (and optionally its vector) of S B S where
// S = diag(B_log)^{-1/2}. The log diagonal is positive, so S is real.
inline double lambda_min(const PencilMatrix& P, Eigen::VectorXcd* vec = nullptr) {
    Eigen::VectorXd S(P.N);
    for (int n = 0; n < P.N; ++n) {
        const double d = kPi / cos_weight(n) * kCLog * log_eigenvalue(P.eps, n);
        S(n) = 1.0 / std::sqrt(d);
    }
    Eigen::MatrixXcd Bt = S.asDiagonal() * P.herm * S.asDiagonal();
    Bt = 0.5 * (Bt + Bt.adjoint().eval());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es;
    if (vec) {
        es.compute(Bt);
        const int idx = 0; // eigenvalues ascending
        *vec = S.asDiagonal() * es.eigenvectors().col(idx);
        return es.eigenvalues()(idx);
    }
    es.compute(Bt, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

// Distance from E to the nearest strictly larger cell eigenvalue.
inline double gap_above(const CellSpec& cell, ModeIndex mode) {
    const double E = mode_eigenvalue(cell.H, mode);
    const double cap = E + std::max(100.0, 4.0 * std::abs(E) + 10.0);
    const int mcap = static_cast<int>(std::ceil(std::sqrt(cap) / kPi)) + 2;
    const int ncap = static_cast<int>(std::ceil(std::sqrt(cap) * cell.H / kPi)) + 2;
    double best = cap - E;
    for (int m = 0; m <= mcap; ++m)
        for (int n = 0; n <= ncap; ++n) {
            const double Eo = mode_eigenvalue(cell.H, {m, n});
            if (Eo > E + 1e-9 * std::max(1.0, E))
                best = std::min(best, Eo - E);
        }
    return best;
}

inline bool trace_vanishes(const Eigen::VectorXcd& uhat) {
    return uhat.norm() < 1e-12;
}

} // namespace detail

// Locates the z at which the pencil becomes singular, strictly above E.
// The preconditioned Hermitian form has lambda_min -> -infinity at E+ (pole)
// and exactly one sign change in (E, E + gap); bisection on that sign is the
// signed-determinant test specialized to the single-crossing bracket.
inline DispersionPoint dispersion_root(
    const CellSpec& cell, double theta, ModeIndex mode, int N = 32,
    std::optional<std::pair<double, double>> bracket = std::nullopt) {
    CellSpec c = cell;
    c.mode = mode;
    const double E = mode_eigenvalue(c.H, mode);
    assert_simple(c, mode, std::max(50.0, 2.0 * std::abs(E) + 10.0));

    DispersionPoint out;
    out.theta = theta;
    out.epsilon = c.eps;
    out.method = "root";
    out.E_asymptotic = leading_order_shift(c, mode, theta, c.eps);

    // Vanishing junction trace: the window never sees the mode, the band
    // point stays at E.
    auto uh = trace_fit(c, mode, theta, N);
    double unorm = 0.0;
    for (const auto& v : uh.c) unorm += std::norm(v);
    if (std::sqrt(unorm) < 1e-12) {
        out.E_numeric = E;
        out.residual = 0.0;
        return out;
    }

    const double gap = detail::gap_above(c, mode);
    const double scale = std::max(1.0, std::abs(E));
    double lo = bracket ? bracket->first : E + 1e-9 * scale;
    double hi = bracket ? bracket->second : E + 0.9 * gap;
    if (!(lo > E) || !(hi > lo))
        throw DomainError("dispersion_root: bracket must satisfy E < lo < hi");

    auto lam = [&](double z) {
        return detail::lambda_min(assemble(c, theta, z, N));
    };

    double flo = lam(lo);
    // The pole forces lambda_min negative close enough to E; tighten if the
    // default lo overshot the root.
    int shrink = 0;
    while (flo > 0.0 && shrink < 6 && !bracket) {
        lo = E + (lo - E) * 1e-2;
        flo = lam(lo);
        ++shrink;
    }
    if (flo > 0.0) {
        if (bracket)
            throw NoRootInBracket(
                "dispersion_root: pencil already positive-definite at lo");
        // Root is closer to E than resolvable; report E.
        out.E_numeric = E;
        out.residual = min_singular(assemble(c, theta, lo, N));
        return out;
    }
    double fhi = lam(hi);
    int extend = 0;
    while (fhi < 0.0 && extend < 4 && !bracket) {
        hi = E + std::min(0.95 * gap, 2.0 * (hi - E));
        fhi = lam(hi);
        ++extend;
        if (hi >= E + 0.949 * gap && fhi < 0.0) break;
    }
    if (fhi < 0.0)
        throw NoRootInBracket("dispersion_root: no sign change in (" +
                              std::to_string(lo) + ", " + std::to_string(hi) +
                              ")");

    for (int it = 0; it < 200 && (hi - lo) > 1e-13 * scale; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (lam(mid) < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    const double z_root = 0.5 * (lo + hi);

    auto P = assemble(c, theta, z_root, N);
    Eigen::VectorXcd cvec;
    detail::lambda_min(P, &cvec);
    // Nonzero-solution certificate: the singular density must couple to the
    // junction trace.
    Complex qc = 0.0;
    double cn = 0.0;
    for (int n = 0; n < N; ++n) {
        const double w = kPi / cos_weight(n);
        qc += std::conj(P.uhat(n)) * w * cvec(n); // <u_theta, f> in X pairing
        cn += w * std::norm(cvec(n));
    }
    if (std::abs(qc) <= 1e-6 * std::sqrt(cn))
        throw NoRootInBracket(
            "dispersion_root: located singularity does not couple to the "
            "junction trace (spurious)");

    out.E_numeric = z_root;
    out.residual = min_singular(P);
    return out;
}

// The scalar reduction: z = E - (pi/2) <(L - (pi/2) R(z))^{-1} u, u>_Pi,
// iterated to a fixed point. Algebraically the same root as the direct
// pencil singularity (same discretization of L, R and the rank-one pole),
// so the two routes must agree to solver tolerance.
inline DispersionPoint dispersion_reduced(const CellSpec& cell, double theta,
                                          ModeIndex mode, int N = 32) {
    CellSpec c = cell;
    c.mode = mode;
    const double E = mode_eigenvalue(c.H, mode);
    assert_simple(c, mode, std::max(50.0, 2.0 * std::abs(E) + 10.0));

    DispersionPoint out;
    out.theta = theta;
    out.epsilon = c.eps;
    out.method = "reduced";
    out.E_asymptotic = leading_order_shift(c, mode, theta, c.eps);

    auto uh = trace_fit(c, mode, theta, N);
    Eigen::VectorXcd uhat(N);
    for (int i = 0; i < N; ++i) uhat(i) = uh.c[i];
    if (detail::trace_vanishes(uhat)) {
        out.E_numeric = E;
        out.residual = 0.0;
        return out;
    }

    Eigen::VectorXd Pi(N);
    Eigen::VectorXcd Ld(N);
    for (int n = 0; n < N; ++n) {
        Pi(n) = kPi / cos_weight(n);
        Ld(n) = log_eigenvalue(c.eps, n);
    }

    double z = consistent_shift(c, mode, theta, c.eps);
    const int Q = std::max(48, 2 * N);
    double defect = 0.0;
    for (int it = 0; it < 100; ++it) {
        Eigen::MatrixXd BR = detail::smooth_gram(c, theta, z, N, Q);
        // Coefficient-space operator L - (pi/2) Pi^{-1} BR.
        Eigen::MatrixXcd M = (-kPi / 2.0) *
                             (Pi.cwiseInverse().asDiagonal() * BR).cast<Complex>();
        M += Ld.asDiagonal();
        Eigen::VectorXcd x = M.partialPivLu().solve(uhat);
        Complex inner = 0.0;
        for (int n = 0; n < N; ++n) inner += std::conj(uhat(n)) * Pi(n) * x(n);
        const double z_new = E - (kPi / 2.0) * inner.real();
        defect = std::abs(z_new - z);
        z = z_new;
        if (defect < 1e-12) {
            out.E_numeric = z;
            out.residual = defect;
            return out;
        }
    }
    throw NonConvergence("dispersion_reduced: no fixed point after 100 "
                         "iterations (defect " +
                         std::to_string(defect) + ")");
}

// Pencil-side band sweep. theta outer, eps inner; method order root before
// reduced. Rows for failed points carry NaN and the failure note.
inline BandTable band_sweep(const CellSpec& cell,
                            const std::vector<double>& eps_list,
                            ModeIndex mode,
                            const std::vector<double>& theta_grid, int N,
                            const std::vector<std::string>& methods,
                            int jobs = 1) {
    struct Task {
        double theta;
        double eps;
        std::string method;
    };
    std::vector<Task> tasks;
    for (double th : theta_grid)
        for (double ep : eps_list)
            for (const auto& m : methods)
                tasks.push_back({th, ep, m});

    BandTable table;
    table.rows.resize(tasks.size());
    std::atomic<size_t> next{0};
    auto worker = [&]() {
        while (true) {
            const size_t i = next.fetch_add(1);
            if (i >= tasks.size()) break;
            const auto& t = tasks[i];
            DispersionPoint p;
            try {
                CellSpec c = cell;
                c.eps = t.eps;
                c.mode = mode;
                if (t.method == "root")
                    p = dispersion_root(c, t.theta, mode, N);
                else if (t.method == "reduced")
                    p = dispersion_reduced(c, t.theta, mode, N);
                else
                    throw ConfigError("band_sweep: unknown method " + t.method);
            } catch (const Error& e) {
                p.theta = t.theta;
                p.epsilon = t.eps;
                p.method = t.method;
                p.note = e.what();
                try {
                    CellSpec c = cell;
                    c.eps = t.eps;
                    c.mode = mode;
                    p.E_asymptotic = leading_order_shift(c, mode, t.theta, t.eps);
                } catch (const Error&) {
                }
            }
            table.rows[i] = std::move(p);
        }
    };
    const int nw = std::max(1, jobs);
    if (nw == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < nw; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return table;
}

} // namespace crackband
