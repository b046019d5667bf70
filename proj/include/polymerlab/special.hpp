// Scalar special functions used by the disorder models and the
// nearly-gamma certifier: standard normal pdf/cdf/quantile and the
// regularized incomplete gamma function with its inverse.
//
// Accuracy targets: norm_quantile is Wichura's AS241 (PPND16), relative
// error ~1e-15 over p in (1e-300, 1); the gamma routines follow the
// classic series / continued-fraction split and are good to ~1e-13.

#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace polymerlab {

inline constexpr double kLogSqrt2Pi = 0.91893853320467274178; // log sqrt(2*pi)
inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;
inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline double norm_pdf(double x) noexcept {
    return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

inline double norm_log_pdf(double x) noexcept {
    return -0.5 * x * x - kLogSqrt2Pi;
}

// Phi(x) via erfc: relative accuracy is kept in the left tail, absolute
// accuracy everywhere else. Underflows to 0 near x = -38.5.
inline double norm_cdf(double x) noexcept {
    return 0.5 * std::erfc(-x * 0.70710678118654752440);
}

inline double norm_sf(double x) noexcept {
    return 0.5 * std::erfc(x * 0.70710678118654752440);
}

// log Phi-bar(x), valid for all x including far in the right tail where
// erfc underflows. Uses the Mills-ratio asymptotic beyond x = 30.
inline double norm_log_sf(double x) noexcept {
    if (x < 30.0) {
        return std::log(norm_sf(x));
    }
    const double z = 1.0 / (x * x);
    // Phi-bar(x) = pdf(x)/x * (1 - 1/x^2 + 3/x^4 - 15/x^6 + ...)
    const double series = 1.0 - z * (1.0 - z * (3.0 - 15.0 * z));
    return norm_log_pdf(x) - std::log(x) + std::log(series);
}

inline double norm_log_cdf(double x) noexcept { return norm_log_sf(-x); }

// Inverse standard normal CDF, AS241 algorithm PPND16 (Wichura 1988).
inline double norm_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        if (p == 0.0) return kNegInf;
        if (p == 1.0) return kInf;
        throw std::domain_error("norm_quantile: p must lie in [0,1], got " + std::to_string(p));
    }
    const double q = p - 0.5;
    if (std::fabs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q *
               (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                     6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
                   1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
                 1.3314166789178437745e+2) * r + 3.3871328727963666080e+0) /
               (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                     3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
                   5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
                 4.2313330701600911252e+1) * r + 1.0);
    }
    double r = (q < 0.0) ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double val;
    if (r <= 5.0) {
        r -= 1.6;
        val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                    2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
                  3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
                4.63033784615654529590e+0) * r + 1.42343711074968357734e+0) /
              (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                    1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                  6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
                2.05319162663775882187e+0) * r + 1.0);
    } else {
        r -= 5.0;
        val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                    1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                  2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
                5.46378491116411436990e+0) * r + 6.65790464350110377720e+0) /
              (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                    1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                  1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
                5.99832206555887937690e-1) * r + 1.0);
    }
    return (q < 0.0) ? -val : val;
}

namespace detail {

// Series expansion of P(a,x), converges fast for x < a+1.
inline double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int n = 0; n < 500; ++n) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Modified Lentz continued fraction for Q(a,x); returns log Q so upper
// tails stay representable far past double underflow of Q itself.
inline double gamma_log_q_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 500; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-16) break;
    }
    return -x + a * std::log(x) - std::lgamma(a) + std::log(h);
}

} // namespace detail

// Regularized lower incomplete gamma P(a,x) = gamma(a,x)/Gamma(a).
inline double gamma_p(double a, double x) {
    if (a <= 0.0) throw std::domain_error("gamma_p: a must be positive");
    if (x < 0.0) throw std::domain_error("gamma_p: x must be nonnegative");
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) return detail::gamma_p_series(a, x);
    const double lq = detail::gamma_log_q_cf(a, x);
    return -std::expm1(lq);
}

inline double gamma_q(double a, double x) {
    if (a <= 0.0) throw std::domain_error("gamma_q: a must be positive");
    if (x < 0.0) throw std::domain_error("gamma_q: x must be nonnegative");
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - detail::gamma_p_series(a, x);
    return std::exp(detail::gamma_log_q_cf(a, x));
}

// log Q(a,x); exact continued fraction for x >= a+1, log(1-P) otherwise.
inline double gamma_log_q(double a, double x) {
    if (x <= 0.0) return 0.0;
    if (x < a + 1.0) return std::log1p(-detail::gamma_p_series(a, x));
    return detail::gamma_log_q_cf(a, x);
}

// Inverse of P(a, .): smallest x with P(a,x) = p. Halley iteration from a
// Wilson-Hilferty start, bisection-guarded.
inline double gamma_p_inv(double a, double p) {
    if (!(p >= 0.0 && p < 1.0)) {
        throw std::domain_error("gamma_p_inv: p must lie in [0,1)");
    }
    if (p == 0.0) return 0.0;
    const double gln = std::lgamma(a);
    const double a1 = a - 1.0;
    const double lna1 = (a > 1.0) ? std::log(a1) : 0.0;
    const double afac = (a > 1.0) ? std::exp(a1 * (lna1 - 1.0) - gln) : 0.0;
    double x;
    if (a > 1.0) {
        const double pp = (p < 0.5) ? p : 1.0 - p;
        const double t = std::sqrt(-2.0 * std::log(pp));
        double z = (2.30753 + t * 0.27061) / (1.0 + t * (0.99229 + t * 0.04481)) - t;
        if (p < 0.5) z = -z;
        x = std::fmax(1e-3, a * std::pow(1.0 - 1.0 / (9.0 * a) + z / (3.0 * std::sqrt(a)), 3));
    } else {
        const double t = 1.0 - a * (0.253 + a * 0.12);
        x = (p < t) ? std::pow(p / t, 1.0 / a) : 1.0 - std::log1p(-(p - t) / (1.0 - t));
    }
    for (int j = 0; j < 64; ++j) {
        if (x <= 0.0) x = 1e-300;
        const double err = gamma_p(a, x) - p;
        double t;
        if (a > 1.0) {
            t = afac * std::exp(-(x - a1) + a1 * (std::log(x) - lna1));
        } else {
            t = std::exp(-x + a1 * std::log(x) - gln);
        }
        const double u = err / t;
        // Halley correction
        x -= (t = u / (1.0 - 0.5 * std::fmin(1.0, u * (a1 / x - 1.0))));
        if (x <= 0.0) x = 0.5 * (x + t);
        if (std::fabs(t) < 1e-14 * x) break;
    }
    return x;
}

} // namespace polymerlab
