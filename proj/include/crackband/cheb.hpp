#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "crackband/cell.hpp"
#include "crackband/errors.hpp"

namespace crackband {

using Complex = std::complex<double>;

// Function on the window segment [-eps, eps] in one of three Chebyshev
// representations (s = y/eps):
//   X_weighted: f(y) = sum c_n T_n(s) / sqrt(eps^2 - y^2)
//   Y_plain:    g(y) = sum c_n T_n(s)
//   U_weighted: f(y) = sum c_n U_n(s) * sqrt(eps^2 - y^2)
// X_weighted carries the inverse-square-root edge behavior of window
// densities; its norm is coefficient-diagonal.
enum class ChebBasis { X_weighted, Y_plain, U_weighted };

struct ChebSeries {
    double eps;
    ChebBasis basis;
    std::vector<Complex> c;

    int size() const { return static_cast<int>(c.size()); }
};

inline std::vector<double> chebgauss_nodes(int Q) {
    std::vector<double> s(Q);
    for (int q = 0; q < Q; ++q)
        s[q] = std::cos((2 * q + 1) * kPi / (2.0 * Q));
    return s;
}

inline std::vector<double> lobatto_nodes(int N) {
    std::vector<double> s(N);
    for (int j = 0; j < N; ++j)
        s[j] = std::cos(kPi * j / (N - 1.0));
    return s;
}

// Clenshaw evaluation of sum c_n T_n(s).
inline Complex cheb_eval(const std::vector<Complex>& c, double s) {
    Complex b1 = 0.0, b2 = 0.0;
    for (int k = static_cast<int>(c.size()) - 1; k >= 1; --k) {
        Complex b0 = c[k] + 2.0 * s * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    return c.empty() ? Complex(0.0) : c[0] + s * b1 - b2;
}

// Interpolate u(eps * s) at the N Chebyshev-Lobatto points; returns the
// Y_plain coefficient representation (exact for polynomial degree < N,
// geometric accuracy for analytic u).
inline ChebSeries cheb_fit(const std::function<Complex(double)>& u, double eps,
                           int N) {
    if (N < 2) throw DomainError("cheb_fit: need N >= 2");
    const auto s = lobatto_nodes(N);
    std::vector<Complex> vals(N);
    for (int j = 0; j < N; ++j) vals[j] = u(eps * s[j]);
    std::vector<Complex> c(N);
    for (int k = 0; k < N; ++k) {
        Complex acc = 0.0;
        for (int j = 0; j < N; ++j) {
            const double w = (j == 0 || j == N - 1) ? 0.5 : 1.0;
            acc += w * vals[j] * std::cos(kPi * k * j / (N - 1.0));
        }
        acc *= 2.0 / (N - 1.0);
        if (k == 0 || k == N - 1) acc *= 0.5;
        c[k] = acc;
    }
    return {eps, ChebBasis::Y_plain, std::move(c)};
}

// Coefficients of d/ds of a T-series.
inline std::vector<Complex> cheb_derivative(const std::vector<Complex>& a) {
    const int N = static_cast<int>(a.size());
    std::vector<Complex> b(N, Complex(0.0));
    if (N < 2) return b;
    for (int k = N - 1; k >= 1; --k) {
        b[k - 1] = (k + 1 < N ? b[k + 1] : Complex(0.0)) + 2.0 * k * a[k];
    }
    b[0] *= 0.5;
    return b;
}

// The log operator  (L f)(x) = int_{-eps}^{eps} log|x-y| f(y) dy  is diagonal
// from X_weighted to Y_plain: eigenvalues pi*log(eps/2) on T_0 and -pi/n on
// T_n. This is the scaled classical identity
//   int log|x-t| T_n(t)/sqrt(1-t^2) dt = -pi log 2 (n=0), -(pi/n) T_n(x).
inline double log_eigenvalue(double eps, int n) {
    return n == 0 ? kPi * std::log(eps / 2.0) : -kPi / n;
}

inline ChebSeries log_apply(const ChebSeries& f) {
    if (f.basis != ChebBasis::X_weighted)
        throw DomainError("log_apply: input must be X_weighted");
    ChebSeries g{f.eps, ChebBasis::Y_plain, f.c};
    for (int n = 0; n < g.size(); ++n) g.c[n] *= log_eigenvalue(f.eps, n);
    return g;
}

inline ChebSeries log_invert(const ChebSeries& g) {
    if (g.basis != ChebBasis::Y_plain)
        throw DomainError("log_invert: input must be Y_plain");
    ChebSeries f{g.eps, ChebBasis::X_weighted, g.c};
    for (int n = 0; n < f.size(); ++n) f.c[n] /= log_eigenvalue(g.eps, n);
    return f;
}

// Expand a T-series as a U-series: T_0 = U_0, T_1 = U_1/2,
// T_j = (U_j - U_{j-2})/2.
inline std::vector<Complex> t_to_u(const std::vector<Complex>& t) {
    const int N = static_cast<int>(t.size());
    std::vector<Complex> u(N, Complex(0.0));
    for (int j = 0; j < N; ++j) {
        if (j == 0) {
            u[0] += t[0];
        } else if (j == 1) {
            u[1] += 0.5 * t[1];
        } else {
            u[j] += 0.5 * t[j];
            u[j - 2] -= 0.5 * t[j];
        }
    }
    return u;
}

// Expand a U-series as a T-series: U_{2k} = T_0 + 2(T_2 + ... + T_{2k}),
// U_{2k+1} = 2(T_1 + T_3 + ... + T_{2k+1}).
inline std::vector<Complex> u_to_t(const std::vector<Complex>& u) {
    const int N = static_cast<int>(u.size());
    // t_k receives 2 * (sum of u_j over j >= k, j same parity as k), except
    // t_0 which takes the plain even-parity tail. O(N) by suffix sums.
    std::vector<Complex> parity_suffix(N + 2, Complex(0.0));
    for (int j = N - 1; j >= 0; --j)
        parity_suffix[j] = u[j] + parity_suffix[j + 2];
    std::vector<Complex> t(N, Complex(0.0));
    if (N > 0) t[0] = parity_suffix[0];
    for (int k = 1; k < N; ++k) t[k] = 2.0 * parity_suffix[k];
    return t;
}

// Finite Hilbert transform  g(x) = PV int f(y)/(x-y) dy  on the window.
// Exact Chebyshev pairs in scaled coordinates:
//   PV int sqrt(1-t^2) U_{n-1}(t)/(x-t) dt =  pi T_n(x)
//   PV int T_n(t) / (sqrt(1-t^2)(x-t)) dt = -pi U_{n-1}(x),  n >= 1,
// and the n=0 weighted integral vanishes identically.
inline ChebSeries finite_hilbert(const ChebSeries& f) {
    const int N = f.size();
    if (f.basis == ChebBasis::X_weighted) {
        std::vector<Complex> u(N, Complex(0.0));
        for (int n = 1; n < N; ++n) u[n - 1] = -kPi * f.c[n] / f.eps;
        auto t = u_to_t(u);
        return {f.eps, ChebBasis::Y_plain, std::move(t)};
    }
    if (f.basis == ChebBasis::U_weighted) {
        std::vector<Complex> t(N + 1, Complex(0.0));
        for (int n = 0; n < N; ++n) t[n + 1] = kPi * f.eps * f.c[n];
        return {f.eps, ChebBasis::Y_plain, std::move(t)};
    }
    throw DomainError("finite_hilbert: input must be X_weighted or U_weighted");
}

// <f, g> = int conj(f) g dy with f in X_weighted. For Y_plain g this is the
// diagonal pairing sum conj(c_n) d_n pi/a_n; for sampled g, Chebyshev-Gauss
// quadrature (the X weight absorbs the Jacobian).
inline Complex x_inner(const ChebSeries& f, const ChebSeries& g) {
    if (f.basis != ChebBasis::X_weighted || g.basis != ChebBasis::Y_plain)
        throw DomainError("x_inner: need X_weighted and Y_plain operands");
    const int N = std::min(f.size(), g.size());
    Complex acc = 0.0;
    for (int n = 0; n < N; ++n)
        acc += std::conj(f.c[n]) * g.c[n] * (kPi / cos_weight(n));
    return acc;
}

inline Complex x_inner(const ChebSeries& f,
                       const std::function<Complex(double)>& g, int Q = 0) {
    if (f.basis != ChebBasis::X_weighted)
        throw DomainError("x_inner: need X_weighted density");
    if (Q <= 0) Q = std::max(48, 2 * f.size());
    const auto s = chebgauss_nodes(Q);
    Complex acc = 0.0;
    for (int q = 0; q < Q; ++q)
        acc += std::conj(cheb_eval(f.c, s[q])) * g(f.eps * s[q]);
    return acc * (kPi / Q);
}

inline double x_norm(const ChebSeries& f) {
    if (f.basis != ChebBasis::X_weighted)
        throw DomainError("x_norm: need X_weighted density");
    double acc = 0.0;
    for (int n = 0; n < f.size(); ++n)
        acc += std::norm(f.c[n]) * (kPi / cos_weight(n));
    return std::sqrt(acc);
}

// Closed-form inverse of the log operator built from the derivative route:
//   I1(x) = -(1 / pi^2 sqrt(eps^2-x^2)) PV int sqrt(eps^2-y^2) u'(y)/(x-y) dy
//   I2(x) =  a(u) / (pi log(eps/2) sqrt(eps^2-x^2)),  a(u) = u(0) - (L I1)(0).
// Independent of the diagonal inverse: it goes through the U-basis Hilbert
// pair, not through division by log eigenvalues (except the rank-one I2).
inline ChebSeries soehngen_invert(const std::function<Complex(double)>& u,
                                  double eps, int N) {
    auto uhat = cheb_fit(u, eps, N);
    // sqrt(eps^2-y^2) u'(y) = sqrt(1-s^2) * sum d_j T_j(s), d = d/ds coeffs.
    auto d = cheb_derivative(uhat.c);
    auto e = t_to_u(d);
    ChebSeries uw{eps, ChebBasis::U_weighted, std::vector<Complex>(e.size())};
    for (size_t j = 0; j < e.size(); ++j) uw.c[j] = e[j] / eps;
    auto pv = finite_hilbert(uw); // Y_plain coeffs of PV int sqrt(...) u' /(x-y)
    ChebSeries I1{eps, ChebBasis::X_weighted,
                  std::vector<Complex>(std::max<size_t>(pv.c.size(), 1))};
    for (size_t k = 0; k < pv.c.size(); ++k)
        I1.c[k] = -pv.c[k] / (kPi * kPi);
    I1.c.resize(N, Complex(0.0));
    const Complex u0 = cheb_eval(uhat.c, 0.0);
    const Complex LI1_0 = cheb_eval(log_apply(I1).c, 0.0);
    const Complex a = u0 - LI1_0;
    ChebSeries out = I1;
    out.c[0] += a / (kPi * std::log(eps / 2.0));
    return out;
}

} // namespace crackband
