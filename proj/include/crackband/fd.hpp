#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <string>
#include <vector>

#include "crackband/asymptotics.hpp"
#include "crackband/band_io.hpp"
#include "crackband/cell.hpp"
#include "crackband/errors.hpp"

namespace crackband {

// Vertex-centered finite differences on the unit cell with the x=0 column
// split into left/right copies along the solid part of the crack. Energy
// form: generalized problem A psi = lambda D psi with D diagonal.
struct FdProblem {
    int n = 0;  // 1/h
    int ny = 0; // H/h
    int ntot = 0;
    double h = 0.0;
    int window_nodes = 0;
    bool real_form = false;
    Eigen::SparseMatrix<double> A_re;
    Eigen::SparseMatrix<Complex> A_cx;
    Eigen::VectorXd mass; // diagonal of D, h^2 included
};

namespace detail {

inline double conj_s(double x) { return x; }
inline Complex conj_s(const Complex& x) { return std::conj(x); }

template <typename Scalar>
void fd_fill(int nx, int ny, const std::vector<bool>& crack,
             const std::vector<int>& lcol, int ntot, Scalar ph,
             Eigen::SparseMatrix<Scalar>& A, Eigen::VectorXd& dm, double h) {
    auto idx = [ny](int i, int j) { return i * (ny + 1) + j; };
    std::vector<Eigen::Triplet<Scalar>> trips;
    trips.reserve(static_cast<size_t>(ntot) * 6);
    std::vector<double> diag(ntot, 0.0);
    auto edge = [&](int a, int b, double w, Scalar phase) {
        // energy w |psi_a - phase psi_b|^2
        diag[a] += w;
        diag[b] += w;
        trips.emplace_back(a, b, Scalar(-w) * phase);
        trips.emplace_back(b, a, Scalar(-w) * conj_s(phase));
    };
    auto wy = [ny](int j) { return (j == 0 || j == ny) ? 0.5 : 1.0; };

    for (int j = 0; j <= ny; ++j) {
        const double w = wy(j);
        for (int i = 0; i + 1 < nx; ++i) edge(idx(i, j), idx(i + 1, j), w, Scalar(1));
        if (crack[j])
            edge(idx(nx - 1, j), lcol[j], w, ph);
        else
            edge(idx(nx - 1, j), idx(0, j), w, ph);
    }
    for (int i = 1; i < nx; ++i)
        for (int j = 0; j < ny; ++j) edge(idx(i, j), idx(i, j + 1), 1.0, Scalar(1));
    for (int j = 0; j < ny; ++j) {
        const bool a_cr = crack[j], b_cr = crack[j + 1];
        if (!a_cr && !b_cr) {
            edge(idx(0, j), idx(0, j + 1), 1.0, Scalar(1));
        } else {
            const int aR = idx(0, j), bR = idx(0, j + 1);
            const int aL = a_cr ? lcol[j] : idx(0, j);
            const int bL = b_cr ? lcol[j + 1] : idx(0, j + 1);
            edge(aR, bR, 0.5, Scalar(1));
            edge(aL, bL, 0.5, Scalar(1));
        }
    }

    dm.setZero(ntot);
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j <= ny; ++j) dm[idx(i, j)] += wy(j);
    for (int j = 0; j <= ny; ++j)
        if (crack[j]) {
            dm[lcol[j]] = 0.5 * wy(j);
            dm[idx(0, j)] = 0.5 * wy(j);
        }
    dm *= h * h;

    for (int a = 0; a < ntot; ++a) trips.emplace_back(a, a, Scalar(diag[a]));
    A.resize(ntot, ntot);
    A.setFromTriplets(trips.begin(), trips.end());
    A.makeCompressed();
}

} // namespace detail

inline FdProblem fd_build(double H, double epsilon, double h, double theta) {
    if (!(h > 0.0) || !(H > 0.0) || !(epsilon > 0.0))
        throw DomainError("fd_build: H, epsilon, h must be positive");
    const int n = static_cast<int>(std::lround(1.0 / h));
    if (n < 8 || std::abs(n * h - 1.0) > 1e-9)
        throw DomainError("fd_build: h must divide 1 (with 1/h >= 8)");
    const int ny = static_cast<int>(std::lround(H / h));
    if (ny < 4 || std::abs(ny * h - H) > 1e-9)
        throw DomainError("fd_build: h must divide H");

    const bool no_crack = epsilon >= H / 2.0 - 1e-14;
    std::vector<bool> crack(ny + 1, false);
    std::vector<int> lcol(ny + 1, -1);
    int nwin = 0;
    for (int j = 0; j <= ny; ++j) {
        const double y = -H / 2.0 + j * h;
        crack[j] = !no_crack && std::abs(y) >= epsilon - 1e-14;
        if (!crack[j]) ++nwin;
    }
    const int nmain = n * (ny + 1);
    int ntot = nmain;
    for (int j = 0; j <= ny; ++j)
        if (crack[j]) lcol[j] = ntot++;

    if (!no_crack && nwin >= 1 && nwin <= 3)
        throw WindowUnderResolved("fd_build: window |y| < " +
                                  std::to_string(epsilon) + " contains only " +
                                  std::to_string(nwin) +
                                  " grid nodes; refine h");

    FdProblem P;
    P.n = n;
    P.ny = ny;
    P.ntot = ntot;
    P.h = h;
    P.window_nodes = nwin;
    const double c = std::cos(theta), s = std::sin(theta);
    P.real_form = std::abs(s) < 1e-14;
    if (P.real_form) {
        detail::fd_fill<double>(n, ny, crack, lcol, ntot, c < 0 ? -1.0 : 1.0,
                                P.A_re, P.mass, h);
        // theta not an exact multiple of pi but numerically real: round.
    } else {
        detail::fd_fill<Complex>(n, ny, crack, lcol, ntot, Complex(c, s),
                                 P.A_cx, P.mass, h);
    }
    return P;
}

struct FdEig {
    double value = 0.0;
    double bound = 0.0; // estimated eigenvalue error from the Lanczos tail
};

namespace detail {

// Shift-invert Lanczos with full reorthogonalization on the symmetrized
// operator D^{1/2} (A - sigma D)^{-1} D^{1/2}.
template <typename Scalar>
std::vector<FdEig> si_lanczos(const Eigen::SparseMatrix<Scalar>& A,
                              const Eigen::VectorXd& dmass, double sigma,
                              int k, int m_max) {
    using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    const int N = static_cast<int>(A.rows());
    m_max = std::min(m_max, N);
    Eigen::VectorXd dh = dmass.cwiseSqrt();

    Eigen::SparseMatrix<Scalar> C = A;
    for (int i = 0; i < N; ++i) C.coeffRef(i, i) -= Scalar(sigma * dmass[i]);
    C.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<Scalar>> lu;
    lu.compute(C);
    if (lu.info() != Eigen::Success)
        throw NonConvergence("si_lanczos: factorization failed at sigma=" +
                             std::to_string(sigma));

    std::mt19937 rng(42);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vec v(N);
    for (int i = 0; i < N; ++i) v[i] = Scalar(gauss(rng));
    v /= v.norm();

    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> V(N, m_max);
    std::vector<double> alpha, beta; // beta[j] couples step j to j+1
    V.col(0) = v;
    Vec w(N);
    int m = 0;
    std::vector<FdEig> out;
    for (int j = 0; j < m_max; ++j) {
        w = dh.template cast<Scalar>().asDiagonal() *
            lu.solve(Vec(dh.template cast<Scalar>().asDiagonal() * V.col(j)));
        if (!w.allFinite())
            throw NonConvergence("si_lanczos: solve produced non-finite values");
        if (j > 0) w -= Scalar(beta[j - 1]) * V.col(j - 1);
        const double a = std::real(Scalar(V.col(j).dot(w)));
        alpha.push_back(a);
        w -= Scalar(a) * V.col(j);
        // full reorthogonalization, twice
        for (int pass = 0; pass < 2; ++pass)
            w -= V.leftCols(j + 1) * (V.leftCols(j + 1).adjoint() * w).eval();
        const double b = w.norm();
        m = j + 1;
        const bool last = (j + 1 == m_max) || b < 1e-12;
        if ((m >= std::max(2 * k, k + 6) && m % 4 == 0) || last) {
            Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
            for (int t = 0; t < m; ++t) T(t, t) = alpha[t];
            for (int t = 0; t + 1 < m; ++t) T(t, t + 1) = T(t + 1, t) = beta[t];
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
            // rank Ritz values by |mu| (closeness to sigma)
            std::vector<int> order(m);
            for (int t = 0; t < m; ++t) order[t] = t;
            std::sort(order.begin(), order.end(), [&](int p, int q) {
                return std::abs(es.eigenvalues()(p)) > std::abs(es.eigenvalues()(q));
            });
            out.clear();
            bool all_ok = true;
            const int want = std::min(k, m);
            for (int t = 0; t < want; ++t) {
                const double mu = es.eigenvalues()(order[t]);
                const double res = std::abs(b * es.eigenvectors()(m - 1, order[t]));
                if (std::abs(mu) < 1e-14) {
                    all_ok = false;
                    break;
                }
                FdEig e;
                e.value = sigma + 1.0 / mu;
                e.bound = res / (mu * mu);
                out.push_back(e);
                if (res > 1e-10 * std::abs(mu)) all_ok = false;
            }
            if ((all_ok && static_cast<int>(out.size()) == k) || last) {
                std::sort(out.begin(), out.end(),
                          [](const FdEig& x, const FdEig& y) {
                              return x.value < y.value;
                          });
                return out;
            }
        }
        if (b < 1e-12) break; // invariant subspace
        beta.push_back(b);
        if (j + 1 < m_max) V.col(j + 1) = w / b;
    }
    std::sort(out.begin(), out.end(),
              [](const FdEig& x, const FdEig& y) { return x.value < y.value; });
    return out;
}

} // namespace detail

// k eigenvalues of the problem nearest sigma, with error estimates.
inline std::vector<FdEig> fd_eigen_near(const FdProblem& P, double sigma, int k,
                                        int m_max = 140) {
    for (int attempt = 0;; ++attempt) {
        try {
            if (P.real_form)
                return detail::si_lanczos<double>(P.A_re, P.mass, sigma, k, m_max);
            return detail::si_lanczos<Complex>(P.A_cx, P.mass, sigma, k, m_max);
        } catch (const NonConvergence&) {
            if (attempt >= 3) throw;
            sigma += 0.01 * std::max(1.0, std::abs(sigma));
        }
    }
}

// k smallest Bloch eigenvalues at quasimomentum theta.
inline std::vector<double> fd_bloch_eigen(const CellSpec& cell, double theta,
                                          double epsilon, double h, int k) {
    FdProblem P = fd_build(cell.H, epsilon, h, theta);
    auto eigs = fd_eigen_near(P, -1.0, k, std::max(140, 8 * k + 60));
    if (static_cast<int>(eigs.size()) < k)
        throw NonConvergence("fd_bloch_eigen: Lanczos returned only " +
                             std::to_string(eigs.size()) + " of " +
                             std::to_string(k) + " eigenvalues");
    std::vector<double> out(k);
    for (int i = 0; i < k; ++i) out[i] = eigs[i].value;
    return out;
}

// Band point per theta: the eigenvalue nearest the predicted perturbed
// position of the tracked cell mode.
inline BandTable oracle_band(const CellSpec& cell, double epsilon,
                             const std::vector<double>& theta_grid, double h) {
    CellSpec c = cell;
    const double E = mode_eigenvalue(c.H, c.mode);
    BandTable table;
    for (double th : theta_grid) {
        DispersionPoint p;
        p.theta = th;
        p.epsilon = epsilon;
        p.method = "fd_oracle";
        try {
            p.E_asymptotic = leading_order_shift(c, c.mode, th, epsilon);
            const double target = consistent_shift(c, c.mode, th, epsilon);
            const double sigma = E + 0.618 * (target - E) + 1e-3 * std::max(1.0, std::abs(E));
            FdProblem P = fd_build(c.H, epsilon, h, th);
            auto eigs = fd_eigen_near(P, sigma, 6);
            if (eigs.empty()) throw NonConvergence("oracle_band: no eigenvalues");
            const FdEig* best = &eigs[0];
            for (const auto& e : eigs)
                if (std::abs(e.value - target) < std::abs(best->value - target))
                    best = &e;
            p.E_numeric = best->value;
            p.residual = best->bound;
        } catch (const Error& e) {
            p.note = e.what();
        }
        table.rows.push_back(std::move(p));
    }
    return table;
}

struct Richardson {
    double value = 0.0; // extrapolated limit
    double p = 0.0;     // measured convergence order
};

// Three grids at h, h/2, h/4: fit E(h) = E* + C h^p through the differences.
inline Richardson richardson_measured(double e1, double e2, double e3) {
    const double d1 = e1 - e2, d2 = e2 - e3;
    if (!(d1 * d2 > 0.0))
        throw InsufficientData(
            "richardson_measured: differences do not contract monotonically");
    Richardson r;
    r.p = std::log2(d1 / d2);
    if (!(r.p > 0.05))
        throw InsufficientData("richardson_measured: no observed convergence");
    r.value = e3 - d2 / (std::pow(2.0, r.p) - 1.0);
    return r;
}

} // namespace crackband
