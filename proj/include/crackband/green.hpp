#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "crackband/cell.hpp"
#include "crackband/cheb.hpp"
#include "crackband/clausen.hpp"
#include "crackband/errors.hpp"

namespace crackband {

// Coefficient of log|y-y'| in the window kernel. Each of the two same-line
// Neumann boundary traces contributes -1/pi (image doubling at the boundary
// doubles the free-space -1/2pi).
inline constexpr double kCLog = -2.0 / kPi;

inline constexpr double kResonanceTol = 1e-12;

// Green function of -d^2/dx^2 - (z - nu) on [0,1] with Neumann ends.
// Exponentially scaled for large kappa so it never overflows.
inline double green1d(double nu, double z, double x, double xp) {
    const double tol = 1e-12;
    if (x < -tol || x > 1 + tol || xp < -tol || xp > 1 + tol)
        throw DomainError("green1d: arguments must lie in [0,1]");
    const double lo = std::min(x, xp), hi = std::max(x, xp);
    const double d = nu - z;
    if (d > 0.0) {
        const double ka = std::sqrt(d);
        if (std::abs(std::sinh(std::min(ka, 30.0))) < kResonanceTol)
            throw ResonanceError("green1d: sinh(kappa) ~ 0");
        if (ka < 30.0) {
            return std::cosh(ka * lo) * std::cosh(ka * (1.0 - hi)) /
                   (ka * std::sinh(ka));
        }
        // cosh(a)cosh(b)/sinh(ka) = e^(a+b-ka)(1+e^-2a)(1+e^-2b) / (2(1-e^-2ka))
        const double a = ka * lo, b = ka * (1.0 - hi);
        return std::exp(a + b - ka) * (1.0 + std::exp(-2.0 * a)) *
               (1.0 + std::exp(-2.0 * b)) /
               (2.0 * ka * (1.0 - std::exp(-2.0 * ka)));
    }
    // Oscillatory branch: the analytic continuation picks up a sign,
    //   cosh(i|k|t) = cos(|k|t), sinh(i|k|) = i sin(|k|), 1/(i k sin) -> -.
    const double k = std::sqrt(-d);
    const double s = std::sin(k);
    if (std::abs(s) < kResonanceTol)
        throw ResonanceError("green1d: sin(k) ~ 0 (1D resonance)");
    return -std::cos(k * lo) * std::cos(k * (1.0 - hi)) / (k * s);
}

// Endpoint values of green1d: same-line g(0,0) = g(1,1) and cross g(0,1).
struct Green1dEnds {
    double same;
    double cross;
};

inline Green1dEnds green1d_ends(double nu, double z) {
    const double d = nu - z;
    if (d > 0.0) {
        const double ka = std::sqrt(d);
        if (ka < kResonanceTol)
            throw ResonanceError("green1d_ends: kappa ~ 0");
        if (ka < 30.0)
            return {std::cosh(ka) / (ka * std::sinh(ka)),
                    1.0 / (ka * std::sinh(ka))};
        const double e = std::exp(-ka);
        const double den = ka * (1.0 - e * e);
        return {(1.0 + e * e) / den, 2.0 * e / den};
    }
    const double k = std::sqrt(-d);
    const double s = std::sin(k);
    if (std::abs(s) < kResonanceTol)
        throw ResonanceError("green1d_ends: sin(k) ~ 0 (1D resonance)");
    return {-std::cos(k) / (k * s), -1.0 / (k * s)};
}

// Endpoint values with the tracked 1D resonance removed: subtracts the
// simple pole a_m/((m pi)^2 - lambda) (same line) and its (-1)^m cross
// counterpart, lambda = z - nu. Series branches keep full precision where
// the direct difference would cancel.
inline Green1dEnds green1d_ends_reg(double nu, double z, int m) {
    const double lam = z - nu;
    if (m == 0) {
        if (std::abs(lam) < 0.01) {
            const double l2 = lam * lam;
            const double gs = 1.0 / 3.0 + lam / 45.0 + 2.0 * l2 / 945.0 +
                              lam * l2 / 4725.0 + 2.0 * l2 * l2 / 93555.0;
            const double gc = -(1.0 / 6.0 + 7.0 * lam / 360.0 +
                                31.0 * l2 / 15120.0 +
                                127.0 * lam * l2 / 604800.0);
            return {gs, gc};
        }
        auto g = green1d_ends(nu, z);
        return {g.same + 1.0 / lam, g.cross + 1.0 / lam};
    }
    const double mp = m * kPi;
    const double sgn = (m % 2 == 0) ? 1.0 : -1.0;
    if (lam > 0.0) {
        const double k = std::sqrt(lam);
        const double t = (lam - mp * mp) / (k + mp); // k - m pi, no cancellation
        if (std::abs(t) < 0.05) {
            const double t2 = t * t;
            const double cot_tail = t * (1.0 / 3.0 + t2 / 45.0 + 2.0 * t2 * t2 / 945.0);
            const double csc_tail = t * (1.0 / 6.0 + 7.0 * t2 / 360.0 + 31.0 * t2 * t2 / 15120.0);
            const double rat = 1.0 / ((t + mp) * (t + 2.0 * mp));
            return {rat + cot_tail / k, sgn * (rat - csc_tail / k)};
        }
    }
    auto g = green1d_ends(nu, z);
    const double pole = 2.0 / (mp * mp - lam);
    return {g.same - pole, g.cross - sgn * pole};
}

// Evaluates the window kernel
//   K(y,y') = G0(0,y;0,y') + G0(1,y;1,y') - 2 cos(theta) G0(0,y;1,y')
// through the transverse cosine-channel expansion, with the slowly decaying
// same-line tail resummed in closed form (log + c3 + c5 cosine sums) plus a
// directly summed O(w^6/n^7) remainder. Cross-line channels decay like
// exp(-kappa_n) and are entirely inside the direct range. Optionally removes
// the log singularity and/or the tracked-mode pole, leaving the smooth part.
class KernelEvaluator {
public:
    KernelEvaluator(const CellSpec& cell, double theta, bool subtract_log,
                    bool subtract_pole)
        : H_(cell.H), costh_(std::cos(theta)), mode_(cell.mode),
          sub_log_(subtract_log), sub_pole_(subtract_pole) {}

    void prepare(double z) {
        z_ = z;
        w2_ = z * H_ * H_ / (kPi * kPi);
        w4_ = w2_ * w2_;
        const double wabs = std::sqrt(std::abs(w2_));
        n_dir_ = std::max({12, mode_.n + 3, static_cast<int>(std::ceil(wabs)) + 4,
                           static_cast<int>(std::ceil(
                               (H_ / kPi) * std::sqrt(1764.0 + std::abs(z)))) + 2});
        n_tail_ = std::max(n_dir_ + 8, 260);
        coef_.assign(n_dir_ + 1, 0.0);
        for (int n = 0; n <= n_dir_; ++n) {
            const double nu = (n * kPi / H_) * (n * kPi / H_);
            const Green1dEnds g = (sub_pole_ && n == mode_.n)
                                      ? green1d_ends_reg(nu, z, mode_.m)
                                      : green1d_ends(nu, z);
            coef_[n] = (cos_weight(n) / H_) * (2.0 * g.same - 2.0 * costh_ * g.cross);
            if (n >= 1) {
                const double n2 = double(n) * n;
                coef_[n] -= (4.0 / kPi) *
                            (1.0 / n + w2_ / (2.0 * n2 * n) + 3.0 * w4_ / (8.0 * n2 * n2 * n));
            }
        }
        tail_.assign(n_tail_ + 1, 0.0);
        for (int n = n_dir_ + 1; n <= n_tail_; ++n) {
            const double n2 = double(n) * n;
            const double f7 = 1.0 / std::sqrt(n2 - w2_) - 1.0 / n -
                              w2_ / (2.0 * n2 * n) - 3.0 * w4_ / (8.0 * n2 * n2 * n);
            tail_[n] = (4.0 / kPi) * f7;
        }
        prepared_ = true;
    }

    double z() const { return z_; }
    bool prepared() const { return prepared_; }

    double eval(double y1, double y2) const {
        const double phm = kPi * (y1 - y2) / H_;
        const double php = kPi * (y1 + y2 + H_) / H_;
        // cos(n s1) cos(n s2) = (cos(n phm) + cos(n php)) / 2 by product rule.
        double cm1 = std::cos(phm), cp1 = std::cos(php);
        double cm2 = 1.0, cp2 = 1.0;
        const double tm = 2.0 * cm1, tp = 2.0 * cp1;
        double acc = coef_[0];
        double cm = cm1, cp = cp1;
        for (int n = 1; n <= n_tail_; ++n) {
            if (n > 1) {
                const double cmn = tm * cm1 - cm2;
                cm2 = cm1; cm1 = cmn;
                const double cpn = tp * cp1 - cp2;
                cp2 = cp1; cp1 = cpn;
                cm = cmn; cp = cpn;
            }
            const double cc = 0.5 * (cm + cp);
            if (n <= n_dir_) acc += coef_[n] * cc;
            else             acc += tail_[n] * cc;
        }
        // Closed-form pieces of the resummed tail.
        const double dlt = y1 - y2;
        double log_m;
        if (sub_log_) {
            // log(2|sin(phm/2)|) - log|y1-y2| stays finite on the diagonal.
            log_m = (std::abs(dlt) < 1e-150)
                        ? std::log(kPi / H_)
                        : std::log(std::abs(2.0 * std::sin(0.5 * phm) / dlt));
        } else {
            log_m = std::log(std::abs(2.0 * std::sin(0.5 * phm)));
        }
        acc += -(2.0 / kPi) * (log_m + std::log(std::abs(2.0 * std::sin(0.5 * php))));
        acc += (4.0 / kPi) * (0.5 * w2_ * 0.5 * (clausen_c3(phm) + clausen_c3(php)) +
                              (3.0 / 8.0) * w4_ * 0.5 * (clausen_c5(phm) + clausen_c5(php)));
        return acc;
    }

    int direct_channels() const { return n_dir_; }

private:
    double H_;
    double costh_;
    ModeIndex mode_;
    bool sub_log_, sub_pole_;
    bool prepared_ = false;
    double z_ = 0.0, w2_ = 0.0, w4_ = 0.0;
    int n_dir_ = 0, n_tail_ = 0;
    std::vector<double> coef_;
    std::vector<double> tail_;
};

// Full kernel at one point. Real-valued for real z (theta enters through
// cos theta only), returned as complex to match the operator's type.
inline Complex kernel_K(const CellSpec& cell, double theta, double z, double y,
                        double yp) {
    const double lim = cell.eps * (1.0 + 1e-12);
    if (std::abs(y) > lim || std::abs(yp) > lim)
        throw DomainError("kernel_K: points must lie in the window");
    if (y == yp)
        throw SingularPoint("kernel_K: y == y' is on the log singularity");
    KernelEvaluator ev(cell, theta, /*subtract_log=*/false, /*subtract_pole=*/false);
    ev.prepare(z);
    return Complex(ev.eval(y, yp), 0.0);
}

// K(y,y';z) = c_log log|y-y'| + u_theta(y) conj(u_theta(y'))/(E - z) + R.
struct KernelDecomposition {
    double c_log;
    ModeIndex mode;
    double E;
    double theta;
    std::function<Complex(double)> u_theta;          // junction trace
    std::function<Complex(double, double, double)> smooth; // R(y, y', z)
};

inline KernelDecomposition decompose(const CellSpec& cell, double theta,
                                     ModeIndex mode) {
    CellSpec tracked = cell;
    tracked.mode = mode;
    const double E = mode_eigenvalue(cell.H, mode);
    assert_simple(tracked, mode, std::max(50.0, 2.0 * E));
    const Complex phase = std::exp(Complex(0.0, theta));
    auto u_theta = [tracked, mode, phase](double y) -> Complex {
        return eigenfunction_value(tracked, mode, 0.0, y) -
               phase * eigenfunction_value(tracked, mode, 1.0, y);
    };
    auto smooth = [tracked, theta](double y, double yp, double z) -> Complex {
        KernelEvaluator ev(tracked, theta, /*subtract_log=*/true,
                           /*subtract_pole=*/true);
        ev.prepare(z);
        return Complex(ev.eval(y, yp), 0.0);
    };
    return {kCLog, mode, E, theta, std::move(u_theta), std::move(smooth)};
}

} // namespace crackband
