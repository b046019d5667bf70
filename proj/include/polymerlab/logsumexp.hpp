// Numerically stable log-sum-exp with absorbing -inf.
//
// -inf encodes an empty path set; it must pass through every reduction
// without producing NaN. Reductions are max-shifted two-pass sums in index
// order, so results are bitwise independent of how callers parallelize.

#pragma once

#include <cmath>
#include <span>

#include "polymerlab/special.hpp"

namespace polymerlab {

inline double lse2(double a, double b) noexcept {
    if (a < b) std::swap(a, b);
    if (b == kNegInf) return a; // covers both -inf (empty + empty)
    return a + std::log1p(std::exp(b - a));
}

inline double logsumexp(std::span<const double> v) noexcept {
    double m = kNegInf;
    for (const double x : v) {
        if (x > m) m = x;
    }
    if (m == kNegInf) return kNegInf;
    double s = 0.0;
    for (const double x : v) s += std::exp(x - m);
    return m + std::log(s);
}

} // namespace polymerlab
