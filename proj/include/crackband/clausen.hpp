#pragma once

#include <cmath>

#include "crackband/cell.hpp"

namespace crackband {

// Even cosine sums  sum_{n>=1} cos(n phi)/n^p  for p = 3, 5.
//
// Both are 2pi-periodic and even, so the argument folds into [0, pi]. The
// non-analytic phi^(p-1) log(phi) piece is split off; the remaining power
// series in (phi/2pi)^2 has zeta(2k) coefficients and is summed until the
// terms fall below 1e-18.
namespace detail {

inline double zeta_even(int k) {
    static constexpr double table[] = {
        0.0,
        1.6449340668482264365, // zeta(2)
        1.0823232337111381916, // zeta(4)
        1.0173430619844491397,
        1.0040773561979443394,
        1.0009945751278180853,
        1.0002460865533080483,
        1.0000612481350587048,
        1.0000152822594086519,
        1.0000038172932649998,
        1.0000009539620338728,
        1.0000002384505027277,
        1.0000000596081890513,
        1.0000000149015548284,
    };
    if (k <= 13) return table[k];
    double z = 1.0;
    for (int j = 2; j <= 8; ++j) z += std::pow(double(j), -2.0 * k);
    return z;
}

inline double clausen_fold(double phi) {
    phi = std::abs(phi);
    phi = std::fmod(phi, 2.0 * kPi);
    if (phi > kPi) phi = 2.0 * kPi - phi;
    return phi;
}

} // namespace detail

inline double clausen_c3(double phi) {
    constexpr double zeta3 = 1.2020569031595942854;
    phi = detail::clausen_fold(phi);
    if (phi == 0.0) return zeta3;
    const double p2 = phi * phi;
    double series = 0.0;
    const double r = (phi / (2.0 * kPi)) * (phi / (2.0 * kPi));
    double rk = r;
    for (int k = 1; k <= 48; ++k, rk *= r) {
        const double term =
            detail::zeta_even(k) / (k * (2.0 * k + 1) * (2.0 * k + 2)) * rk;
        series += term;
        if (term < 1e-18) break;
    }
    return zeta3 - 0.75 * p2 + 0.5 * p2 * std::log(phi) - p2 * series;
}

inline double clausen_c5(double phi) {
    constexpr double zeta3 = 1.2020569031595942854;
    constexpr double zeta5 = 1.0369277551433699263;
    phi = detail::clausen_fold(phi);
    if (phi == 0.0) return zeta5;
    const double p2 = phi * phi;
    const double p4 = p2 * p2;
    double series = 0.0;
    const double r = (phi / (2.0 * kPi)) * (phi / (2.0 * kPi));
    double rk = r;
    for (int k = 1; k <= 48; ++k, rk *= r) {
        const double term = detail::zeta_even(k) /
                            (k * (2.0 * k + 1) * (2.0 * k + 2) * (2.0 * k + 3) *
                             (2.0 * k + 4)) *
                            rk;
        series += term;
        if (term < 1e-18) break;
    }
    return zeta5 - 0.5 * zeta3 * p2 + (25.0 / 288.0) * p4 -
           (p4 / 24.0) * std::log(phi) + p4 * series;
}

} // namespace crackband
