#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <random>
#include <tuple>
#include <vector>

#include "crackband/band_io.hpp"
#include "crackband/cell.hpp"
#include "crackband/cheb.hpp"
#include "crackband/errors.hpp"

namespace crackband {

// |uA0 - e^{i theta} uA1|^2, the junction coupling strength of the tracked
// mode. Equals |uA0|^2 (2 - 2 (-1)^m cos theta) for rectangle modes.
inline double junction_coupling(const CellSpec& cell, ModeIndex mode,
                                double theta) {
    auto [uA0, uA1] = junction_values(cell, mode);
    const Complex d = Complex(uA0) - std::exp(Complex(0.0, theta)) * uA1;
    return std::norm(d);
}

// First-order dispersion prediction E + (2 pi / |log eps|) |uA0-e^{i th}uA1|^2.
// The 2 pi prefactor is kept as the reference formula; the empirically
// supported prefactor (consistent with the implemented log coefficient) is
// pi/2, exposed below as consistent_shift for solver seeding and reporting.
inline double leading_order_shift(const CellSpec& cell, ModeIndex mode,
                                  double theta, double epsilon) {
    if (!(epsilon > 0.0) || !(epsilon < 1.0))
        throw DomainError("leading_order_shift: need 0 < eps < 1");
    const double E = mode_eigenvalue(cell.H, mode);
    return E + (2.0 * kPi / std::abs(std::log(epsilon))) *
                   junction_coupling(cell, mode, theta);
}

inline constexpr double kConsistentPrefactor = kPi / 2.0;

inline double consistent_shift(const CellSpec& cell, ModeIndex mode,
                               double theta, double epsilon) {
    const double E = mode_eigenvalue(cell.H, mode);
    return E + (kConsistentPrefactor / std::abs(std::log(epsilon))) *
                   junction_coupling(cell, mode, theta);
}

// Junction trace u_theta(y) = u(0,y) - e^{i theta} u(1,y) fitted on the
// window, Y_plain representation.
inline ChebSeries trace_fit(const CellSpec& cell, ModeIndex mode, double theta,
                            int N) {
    const Complex phase = std::exp(Complex(0.0, theta));
    return cheb_fit(
        [&](double y) {
            return Complex(eigenfunction_value(cell, mode, 0.0, y)) -
                   phase * eigenfunction_value(cell, mode, 1.0, y);
        },
        cell.eps, N);
}

// <L^{-1} u_theta, u_theta>: the quantity whose |log eps|-scaled limit is
// |u_theta(0)|^2. Evaluated through the diagonal inverse and the
// coefficient pairing.
inline Complex log_inverse_inner(const CellSpec& cell, double theta,
                                 double epsilon, ModeIndex mode, int N) {
    CellSpec c = cell;
    c.eps = epsilon;
    c.mode = mode;
    auto uhat = trace_fit(c, mode, theta, N);
    auto Linv_u = log_invert(uhat);
    // <f, g> with f = L^{-1}u (X_weighted), g = u (Y_plain).
    return x_inner(Linv_u, uhat);
}

// Empirical probe of |<B L^{-1} u_theta, u_theta>| * |log eps| / ||B|| for a
// supplied coefficient-space operator B with known norm.
inline double inverse_bound_probe(const CellSpec& cell, double theta,
                                  double epsilon, ModeIndex mode, int N,
                                  const Eigen::MatrixXcd& B, double B_norm) {
    if (B.rows() != N || B.cols() != N)
        throw DomainError("inverse_bound_probe: B must be N x N");
    if (B_norm == 0.0) return 0.0;
    CellSpec c = cell;
    c.eps = epsilon;
    c.mode = mode;
    auto uhat = trace_fit(c, mode, theta, N);
    auto Linv_u = log_invert(uhat);
    Eigen::VectorXcd x(N);
    for (int i = 0; i < N; ++i) x(i) = Linv_u.c[i];
    Eigen::VectorXcd Bx = B * x;
    ChebSeries Bf{epsilon, ChebBasis::X_weighted,
                  std::vector<Complex>(Bx.data(), Bx.data() + N)};
    const Complex val = x_inner(Bf, uhat);
    return std::abs(val) * std::abs(std::log(epsilon)) / B_norm;
}

struct LeadingFit {
    double c1 = 0.0;
    double c2 = 0.0;
    double rms = 0.0;
};

// Least-squares fit of E_numeric(theta, .) - E against
// c1/|log eps| + c2/log^2 eps over the table's eps values at this theta.
inline LeadingFit fit_leading_coefficient(const BandTable& band, double theta,
                                          double E) {
    std::vector<double> L, dE;
    for (const auto& r : band.rows) {
        if (std::abs(r.theta - theta) > 1e-12) continue;
        if (!std::isfinite(r.E_numeric)) continue;
        L.push_back(std::abs(std::log(r.epsilon)));
        dE.push_back(r.E_numeric - E);
    }
    const int n = static_cast<int>(L.size());
    if (n < 4)
        throw InsufficientData(
            "fit_leading_coefficient: need >= 4 epsilon samples, have " +
            std::to_string(n));
    Eigen::MatrixXd A(n, 2);
    Eigen::VectorXd b(n);
    for (int i = 0; i < n; ++i) {
        A(i, 0) = 1.0 / L[i];
        A(i, 1) = 1.0 / (L[i] * L[i]);
        b(i) = dE[i];
    }
    Eigen::Vector2d x = A.colPivHouseholderQr().solve(b);
    const double rms = std::sqrt((A * x - b).squaredNorm() / n);
    return {x(0), x(1), rms};
}

} // namespace crackband
