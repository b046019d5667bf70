// Small summary-statistics helpers shared by the Monte Carlo drivers.
// Accumulation is two-pass in fixed index order (long double carries) so
// summaries are bitwise reproducible.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace polymerlab {

struct MeanVar {
    std::size_t count = 0;
    double mean = 0.0;
    double variance = 0.0; // unbiased (n-1); 0 for n < 2
    double stderr_of_mean = 0.0;
};

inline MeanVar mean_var(std::span<const double> v) {
    MeanVar r;
    r.count = v.size();
    if (v.empty()) return r;
    long double s = 0.0L;
    for (const double x : v) s += x;
    r.mean = static_cast<double>(s / static_cast<long double>(v.size()));
    if (v.size() >= 2) {
        long double q = 0.0L;
        for (const double x : v) {
            const long double d = static_cast<long double>(x) - r.mean;
            q += d * d;
        }
        r.variance = static_cast<double>(q / static_cast<long double>(v.size() - 1));
        r.stderr_of_mean = std::sqrt(r.variance / static_cast<double>(v.size()));
    }
    return r;
}

// Linear-interpolation quantile (type 7): h = (n-1)p.
inline double quantile_sorted(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw std::invalid_argument("quantile of empty sample");
    if (p <= 0.0) return sorted.front();
    if (p >= 1.0) return sorted.back();
    const double h = static_cast<double>(sorted.size() - 1) * p;
    const std::size_t lo = static_cast<std::size_t>(h);
    const double frac = h - static_cast<double>(lo);
    if (lo + 1 >= sorted.size()) return sorted.back();
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

// Ordinary least squares y = a + b x; returns {intercept, slope, r2}.
struct LinearFit {
    double intercept = 0.0;
    double slope = 0.0;
    double r_squared = 0.0;
};

inline LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw std::invalid_argument("linear_fit: need >= 2 paired points");
    }
    const std::size_t n = x.size();
    long double sx = 0, sy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
    }
    const long double mx = sx / static_cast<long double>(n);
    const long double my = sy / static_cast<long double>(n);
    long double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const long double dx = x[i] - mx;
        const long double dy = y[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0.0L) throw std::invalid_argument("linear_fit: degenerate x values");
    LinearFit f;
    f.slope = static_cast<double>(sxy / sxx);
    f.intercept = static_cast<double>(my - (sxy / sxx) * mx);
    f.r_squared = (syy == 0.0L) ? 1.0 : static_cast<double>((sxy * sxy) / (sxx * syy));
    return f;
}

} // namespace polymerlab
