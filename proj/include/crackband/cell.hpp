#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "crackband/errors.hpp"

namespace crackband {

inline constexpr double kPi = std::numbers::pi;

// Cosine-basis normalization weights: a_0 = 1, a_k = 2 for k >= 1.
inline double cos_weight(int k) { return k == 0 ? 1.0 : 2.0; }

struct ModeIndex {
    int m = 0; // longitudinal half-waves on [0,1]
    int n = 0; // transverse half-waves on [-H/2, H/2]

    bool operator==(const ModeIndex&) const = default;
    bool operator<(const ModeIndex& o) const {
        return m != o.m ? m < o.m : n < o.n;
    }
};

// One periodic cell [0,1] x [-H/2, H/2] with a centered coupling window of
// half-aperture eps on each vertical edge.
struct CellSpec {
    double H;
    double eps;
    ModeIndex mode;

    CellSpec(double height, double half_aperture, ModeIndex tracked)
        : H(height), eps(half_aperture), mode(tracked) {
        if (!(H > 0.0))
            throw DomainError("CellSpec: H must be positive");
        if (!(eps > 0.0) || !(eps < H / 2.0))
            throw DomainError("CellSpec: need 0 < eps < H/2");
        if (mode.m < 0 || mode.n < 0)
            throw DomainError("CellSpec: mode indices must be nonnegative");
    }
};

struct EigenPair {
    double E;   // Neumann eigenvalue
    double uA0; // eigenfunction at (0,0)
    double uA1; // eigenfunction at (1,0)
};

inline double mode_eigenvalue(double H, ModeIndex mode) {
    const double km = mode.m * kPi;
    const double kn = mode.n * kPi / H;
    return km * km + kn * kn;
}

// phi_{m,n}(x,y) = sqrt(a_m a_n / H) cos(m pi x) cos(n pi (y + H/2) / H),
// normalized to unit L2 norm over the cell.
inline double eigenfunction_value(const CellSpec& cell, ModeIndex mode,
                                  double x, double y) {
    const double tol = 1e-12;
    if (x < -tol || x > 1.0 + tol || std::abs(y) > cell.H / 2.0 + tol)
        throw DomainError("eigenfunction_value: point outside cell");
    const double amp = std::sqrt(cos_weight(mode.m) * cos_weight(mode.n) / cell.H);
    return amp * std::cos(mode.m * kPi * x) *
           std::cos(mode.n * kPi * (y + cell.H / 2.0) / cell.H);
}

// Exact by parity: cos(n pi / 2) is 0, -1, or 1, and cos(m pi) = (-1)^m.
inline std::pair<double, double> junction_values(const CellSpec& cell,
                                                 ModeIndex mode) {
    double uA0 = 0.0;
    if (mode.n % 2 == 0) {
        const double amp =
            std::sqrt(cos_weight(mode.m) * cos_weight(mode.n) / cell.H);
        uA0 = (mode.n % 4 == 0) ? amp : -amp;
    }
    const double uA1 = (mode.m % 2 == 0) ? uA0 : -uA0;
    return {uA0, uA1};
}

inline std::vector<std::pair<ModeIndex, EigenPair>>
neumann_eigenpairs(const CellSpec& cell, int count) {
    if (count < 1)
        throw DomainError("neumann_eigenpairs: count must be >= 1");
    // Enumerate enough (m,n) that the first `count` eigenvalues cannot be
    // missed, then sort and truncate. E <= (count*pi)^2 * max(1,1/H^2) is a
    // crude cap; the index bound below is the safe version of it.
    std::vector<std::pair<ModeIndex, EigenPair>> all;
    int grow = count;
    while (true) {
        all.clear();
        // Upper bound on E among the first `count` modes: the (grow,0) and
        // (0,grow') corners give a certainly-large-enough threshold.
        const double Emax =
            std::max(mode_eigenvalue(cell.H, {grow, 0}),
                     mode_eigenvalue(cell.H, {0, static_cast<int>(std::ceil(grow * cell.H)) + 1}));
        const int mcap = static_cast<int>(std::ceil(std::sqrt(Emax) / kPi)) + 2;
        const int ncap = static_cast<int>(std::ceil(std::sqrt(Emax) * cell.H / kPi)) + 2;
        for (int m = 0; m <= mcap; ++m) {
            for (int n = 0; n <= ncap; ++n) {
                const ModeIndex mi{m, n};
                const double E = mode_eigenvalue(cell.H, mi);
                if (E > Emax) break;
                auto [uA0, uA1] = junction_values(cell, mi);
                all.push_back({mi, {E, uA0, uA1}});
            }
        }
        if (static_cast<int>(all.size()) >= count) break;
        grow *= 2;
    }
    std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
        if (a.second.E != b.second.E) return a.second.E < b.second.E;
        return a.first < b.first;
    });
    all.resize(count);
    return all;
}

// Distance from the tracked eigenvalue to the rest of the spectrum below
// E + neighborhood. Throws if the mode is not simple.
inline double assert_simple(const CellSpec& cell, ModeIndex mode,
                            double neighborhood) {
    if (neighborhood <= 0.0)
        throw DomainError("assert_simple: neighborhood must be positive");
    const double E = mode_eigenvalue(cell.H, mode);
    const double cap = E + neighborhood;
    const int mcap = static_cast<int>(std::ceil(std::sqrt(cap) / kPi)) + 2;
    const int ncap = static_cast<int>(std::ceil(std::sqrt(cap) * cell.H / kPi)) + 2;
    // Exact collisions (same closed-form value) are detected with a relative
    // tolerance; rounding of (n pi / H)^2 makes bitwise equality unreliable.
    const double coll_tol = 1e-9 * std::max(1.0, E);
    double gap = std::numeric_limits<double>::infinity();
    for (int m = 0; m <= mcap; ++m) {
        for (int n = 0; n <= ncap; ++n) {
            if (m == mode.m && n == mode.n) continue;
            const double Eo = mode_eigenvalue(cell.H, {m, n});
            if (Eo > cap) break;
            if (std::abs(Eo - E) <= coll_tol) {
                std::ostringstream os;
                os << "assert_simple: mode (" << mode.m << "," << mode.n
                   << ") collides with (" << m << "," << n << ") at E=" << E;
                throw DegenerateMode(os.str());
            }
            gap = std::min(gap, std::abs(Eo - E));
        }
    }
    return gap;
}

} // namespace crackband
