#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <random>

#include "crackband/asymptotics.hpp"

using namespace crackband;

TEST(JunctionCoupling, ClosedForm) {
    const CellSpec square(1.0, 0.01, {1, 0});
    EXPECT_NEAR(junction_coupling(square, {1, 0}, 0.0), 8.0, 1e-13);
    EXPECT_NEAR(junction_coupling(square, {1, 0}, kPi), 0.0, 1e-13);

    const CellSpec tall(1.5, 0.05, {1, 0});
    for (double th : {0.0, 0.9, kPi, 4.4}) {
        EXPECT_NEAR(junction_coupling(tall, {1, 0}, th),
                    (4.0 / 3.0) * (2.0 + 2.0 * std::cos(th)), 1e-13);
        // even-m modes flip the sign of the cos theta term
        EXPECT_NEAR(junction_coupling(tall, {0, 2}, th),
                    (2.0 / 1.5) * (2.0 - 2.0 * std::cos(th)), 1e-13);
        // odd transverse index kills the trace entirely
        EXPECT_EQ(junction_coupling(tall, {0, 1}, th), 0.0);
        EXPECT_EQ(junction_coupling(tall, {2, 3}, th), 0.0);
    }
}

TEST(Shifts, ClosedFormAndValidation) {
    const CellSpec cell(1.5, 0.05, {1, 0});
    const double E = mode_eigenvalue(1.5, {1, 0});
    const double th = 0.9, eps = 1e-3;
    const double q = junction_coupling(cell, {1, 0}, th);
    EXPECT_NEAR(leading_order_shift(cell, {1, 0}, th, eps),
                E + 2.0 * kPi * q / std::abs(std::log(eps)), 1e-13);
    EXPECT_NEAR(consistent_shift(cell, {1, 0}, th, eps),
                E + (kPi / 2.0) * q / std::abs(std::log(eps)), 1e-13);
    EXPECT_GT(leading_order_shift(cell, {1, 0}, th, eps), E);
    EXPECT_THROW(leading_order_shift(cell, {1, 0}, th, 0.0), DomainError);
    EXPECT_THROW(leading_order_shift(cell, {1, 0}, th, 1.0), DomainError);
}

TEST(TraceFit, MatchesClosedFormTrace) {
    const double H = 1.3, eps = 0.01, th = 0.6;
    const CellSpec cell(H, eps, {1, 1});
    auto fit = trace_fit(cell, {1, 1}, th, 24);
    const Complex phase = std::exp(Complex(0.0, th));
    for (double s : {-0.95, -0.2, 0.0, 0.63}) {
        const double y = eps * s;
        const double tr = std::sqrt(4.0 / H) * std::cos(kPi * (y + H / 2) / H);
        const Complex expect = Complex(tr) * (1.0 + phase);
        EXPECT_LT(std::abs(cheb_eval(fit.c, s) - expect), 1e-13);
    }
}

// The |log eps|-scaled inverse pairing approaches the squared center trace.
TEST(LogInverseInner, ScaledLimitIsCenterTraceSquared) {
    const CellSpec cell(1.5, 0.05, {1, 0});
    const double th = 1.0;
    const double target = junction_coupling(cell, {1, 0}, th);
    double prev = 1e100;
    double last = 0.0;
    for (double eps : {1e-2, 1e-4, 1e-6, 1e-8}) {
        const Complex inner = log_inverse_inner(cell, th, eps, {1, 0}, 24);
        EXPECT_LT(std::abs(inner.imag()), 1e-12 * std::abs(inner.real()) + 1e-14);
        const double scaled = inner.real() * std::log(eps);
        const double dev = std::abs(scaled - target);
        EXPECT_LT(dev, prev) << "eps=" << eps;
        prev = dev;
        last = scaled;
    }
    EXPECT_GT(last / target, 0.5);
    EXPECT_LT(last / target, 2.0);
}

TEST(LogInverseInner, VanishingCenterTrace) {
    // odd transverse mode: trace vanishes at the window center, so the
    // scaled pairing tends to zero
    const CellSpec cell(1.3, 0.05, {1, 1});
    double prev = 1e100;
    for (double eps : {1e-2, 1e-3, 1e-4}) {
        const double scaled =
            log_inverse_inner(cell, 0.7, eps, {1, 1}, 24).real() *
            std::log(eps);
        EXPECT_LT(std::abs(scaled), prev) << "eps=" << eps;
        prev = std::abs(scaled);
    }
    EXPECT_LT(prev, 1e-2);
}

TEST(InverseBoundProbe, IdentityAndScaledRandomOperators) {
    const CellSpec cell(1.5, 0.05, {1, 0});
    const double th = 0.8;
    const int N = 16;
    const double q = junction_coupling(cell, {1, 0}, th);

    const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(N, N);
    std::mt19937 rng(17);
    std::normal_distribution<double> gauss;
    Eigen::MatrixXcd B(N, N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) B(i, j) = Complex(gauss(rng), gauss(rng));
    const double B_norm = B.jacobiSvd().singularValues()(0);

    for (double eps : {1e-3, 1e-6, 1e-9}) {
        const double pid = inverse_bound_probe(cell, th, eps, {1, 0}, N, I, 1.0);
        EXPECT_GT(pid, 0.2 * q);
        EXPECT_LT(pid, 2.0 * q + 0.5);
        const double pb = inverse_bound_probe(cell, th, eps, {1, 0}, N, B, B_norm);
        EXPECT_GE(pb, 0.0);
        EXPECT_LT(pb, 2.0 * q + 0.5) << "eps=" << eps;
    }
    EXPECT_EQ(inverse_bound_probe(cell, th, 1e-3, {1, 0}, N, B, 0.0), 0.0);
    EXPECT_THROW(
        inverse_bound_probe(cell, th, 1e-3, {1, 0}, N + 1, B, B_norm),
        DomainError);
}

TEST(FitLeadingCoefficient, RecoversSyntheticAndFilters) {
    const double E = 9.0, c1 = 7.25, c2 = -0.4;
    BandTable band;
    for (double th : {0.3, 1.7}) {
        for (double eps : {1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7}) {
            const double L = std::abs(std::log(eps));
            DispersionPoint p;
            p.theta = th;
            p.epsilon = eps;
            p.method = "root";
            // different planted coefficients per theta
            const double a = (th < 1.0) ? c1 : 2.0 * c1;
            p.E_numeric = E + a / L + c2 / (L * L);
            p.E_asymptotic = E;
            p.residual = 0.0;
            band.rows.push_back(p);
        }
    }
    // a stray unrelated row and a NaN row must both be ignored
    DispersionPoint nanrow;
    nanrow.theta = 0.3;
    nanrow.epsilon = 1e-8;
    nanrow.method = "root";
    nanrow.E_numeric = std::nan("");
    band.rows.push_back(nanrow);

    auto f1 = fit_leading_coefficient(band, 0.3, E);
    EXPECT_NEAR(f1.c1, c1, 1e-9);
    EXPECT_NEAR(f1.c2, c2, 1e-7);
    EXPECT_LT(f1.rms, 1e-12);
    auto f2 = fit_leading_coefficient(band, 1.7, E);
    EXPECT_NEAR(f2.c1, 2.0 * c1, 1e-9);

    EXPECT_THROW(fit_leading_coefficient(band, 2.9, E), InsufficientData);
    // three finite samples are not enough
    BandTable small;
    for (double eps : {1e-2, 1e-3, 1e-4}) {
        DispersionPoint p;
        p.theta = 0.0;
        p.epsilon = eps;
        p.method = "root";
        p.E_numeric = E + c1 / std::abs(std::log(eps));
        band.rows.push_back(p);
        small.rows.push_back(p);
    }
    EXPECT_THROW(fit_leading_coefficient(small, 0.0, E), InsufficientData);
}
