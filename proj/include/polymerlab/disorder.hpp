// Disorder models: the i.i.d. site-potential laws the toolkit supports.
//
// All four models are mean-zero by analytic centering (never by empirical
// shift), absolutely continuous with closed-form density, CDF, survival and
// quantile, and have a log-moment generating function finite on an open
// interval around 0.

#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "polymerlab/special.hpp"

namespace polymerlab {

enum class DisorderKind {
    gaussian,             // N(0, sigma^2)
    centered_exponential, // Exp(rate) - 1/rate
    centered_gamma,       // Gamma(shape, scale) - shape*scale
    centered_uniform,     // U(-half_width, half_width)
};

inline const char* kind_name(DisorderKind k) noexcept {
    switch (k) {
        case DisorderKind::gaussian: return "gaussian";
        case DisorderKind::centered_exponential: return "centered_exponential";
        case DisorderKind::centered_gamma: return "centered_gamma";
        case DisorderKind::centered_uniform: return "centered_uniform";
    }
    return "?";
}

class DisorderModel {
public:
    static DisorderModel make_gaussian(double sigma) {
        require_positive(sigma, "sigma");
        return DisorderModel(DisorderKind::gaussian, sigma, 0.0);
    }
    static DisorderModel make_centered_exponential(double rate) {
        require_positive(rate, "rate");
        return DisorderModel(DisorderKind::centered_exponential, rate, 0.0);
    }
    static DisorderModel make_centered_gamma(double shape, double scale) {
        require_positive(shape, "shape");
        require_positive(scale, "scale");
        return DisorderModel(DisorderKind::centered_gamma, shape, scale);
    }
    static DisorderModel make_centered_uniform(double half_width) {
        require_positive(half_width, "half_width");
        return DisorderModel(DisorderKind::centered_uniform, half_width, 0.0);
    }

    DisorderKind kind() const noexcept { return kind_; }
    double param1() const noexcept { return p1_; }
    double param2() const noexcept { return p2_; }

    // Open interval (lo, hi) on which log_mgf is finite.
    std::pair<double, double> mgf_interval() const noexcept {
        switch (kind_) {
            case DisorderKind::gaussian: return {kNegInf, kInf};
            case DisorderKind::centered_exponential: return {kNegInf, p1_};
            case DisorderKind::centered_gamma: return {kNegInf, 1.0 / p2_};
            case DisorderKind::centered_uniform: return {kNegInf, kInf};
        }
        return {0.0, 0.0};
    }

    // lambda(theta) = log E[exp(theta * omega)], closed form per model.
    double log_mgf(double theta) const {
        const auto [lo, hi] = mgf_interval();
        if (!(theta > lo && theta < hi)) {
            throw std::domain_error(
                "log_mgf(" + std::string(kind_name(kind_)) + "): theta=" +
                std::to_string(theta) + " outside finiteness interval (" +
                std::to_string(lo) + ", " + std::to_string(hi) + ")");
        }
        switch (kind_) {
            case DisorderKind::gaussian:
                return 0.5 * p1_ * p1_ * theta * theta;
            case DisorderKind::centered_exponential:
                // Exp(rate) shifted by -1/rate: -theta/rate - log(1 - theta/rate)
                return -theta / p1_ - std::log1p(-theta / p1_);
            case DisorderKind::centered_gamma:
                // Gamma(k, s) shifted by -k*s: -k*s*theta - k*log(1 - s*theta)
                return -p1_ * p2_ * theta - p1_ * std::log1p(-p2_ * theta);
            case DisorderKind::centered_uniform:
                return log_sinhc(p1_ * theta);
        }
        return 0.0;
    }

    double variance() const noexcept {
        switch (kind_) {
            case DisorderKind::gaussian: return p1_ * p1_;
            case DisorderKind::centered_exponential: return 1.0 / (p1_ * p1_);
            case DisorderKind::centered_gamma: return p1_ * p2_ * p2_;
            case DisorderKind::centered_uniform: return p1_ * p1_ / 3.0;
        }
        return 0.0;
    }

    // Support interval (endpoints may be infinite).
    std::pair<double, double> support() const noexcept {
        switch (kind_) {
            case DisorderKind::gaussian: return {kNegInf, kInf};
            case DisorderKind::centered_exponential: return {-1.0 / p1_, kInf};
            case DisorderKind::centered_gamma: return {-p1_ * p2_, kInf};
            case DisorderKind::centered_uniform: return {-p1_, p1_};
        }
        return {0.0, 0.0};
    }

    double pdf(double y) const noexcept {
        switch (kind_) {
            case DisorderKind::gaussian:
                return norm_pdf(y / p1_) / p1_;
            case DisorderKind::centered_exponential: {
                const double t = y + 1.0 / p1_;
                return t < 0.0 ? 0.0 : p1_ * std::exp(-p1_ * t);
            }
            case DisorderKind::centered_gamma: {
                const double w = y + p1_ * p2_;
                if (w <= 0.0) return 0.0;
                return std::exp(log_pdf(y));
            }
            case DisorderKind::centered_uniform:
                return (y < -p1_ || y > p1_) ? 0.0 : 0.5 / p1_;
        }
        return 0.0;
    }

    double log_pdf(double y) const noexcept {
        switch (kind_) {
            case DisorderKind::gaussian:
                return norm_log_pdf(y / p1_) - std::log(p1_);
            case DisorderKind::centered_exponential: {
                const double t = y + 1.0 / p1_;
                return t < 0.0 ? kNegInf : std::log(p1_) - p1_ * t;
            }
            case DisorderKind::centered_gamma: {
                const double w = y + p1_ * p2_;
                if (w <= 0.0) return kNegInf;
                return (p1_ - 1.0) * std::log(w) - w / p2_ - std::lgamma(p1_) -
                       p1_ * std::log(p2_);
            }
            case DisorderKind::centered_uniform:
                return (y < -p1_ || y > p1_) ? kNegInf : -std::log(2.0 * p1_);
        }
        return kNegInf;
    }

    double cdf(double y) const noexcept {
        switch (kind_) {
            case DisorderKind::gaussian:
                return norm_cdf(y / p1_);
            case DisorderKind::centered_exponential: {
                const double t = y + 1.0 / p1_;
                return t < 0.0 ? 0.0 : -std::expm1(-p1_ * t);
            }
            case DisorderKind::centered_gamma: {
                const double w = y + p1_ * p2_;
                return w <= 0.0 ? 0.0 : gamma_p(p1_, w / p2_);
            }
            case DisorderKind::centered_uniform: {
                if (y <= -p1_) return 0.0;
                if (y >= p1_) return 1.0;
                return 0.5 * (y / p1_ + 1.0);
            }
        }
        return 0.0;
    }

    // Survival 1 - H(y), computed directly so upper tails keep relative
    // precision instead of cancelling against 1.
    double sf(double y) const noexcept {
        switch (kind_) {
            case DisorderKind::gaussian:
                return norm_sf(y / p1_);
            case DisorderKind::centered_exponential: {
                const double t = y + 1.0 / p1_;
                return t < 0.0 ? 1.0 : std::exp(-p1_ * t);
            }
            case DisorderKind::centered_gamma: {
                const double w = y + p1_ * p2_;
                return w <= 0.0 ? 1.0 : gamma_q(p1_, w / p2_);
            }
            case DisorderKind::centered_uniform:
                return 1.0 - cdf(y);
        }
        return 0.0;
    }

    double log_sf(double y) const noexcept {
        switch (kind_) {
            case DisorderKind::gaussian:
                return norm_log_sf(y / p1_);
            case DisorderKind::centered_exponential: {
                const double t = y + 1.0 / p1_;
                return t < 0.0 ? 0.0 : -p1_ * t;
            }
            case DisorderKind::centered_gamma: {
                const double w = y + p1_ * p2_;
                return w <= 0.0 ? 0.0 : gamma_log_q(p1_, w / p2_);
            }
            case DisorderKind::centered_uniform:
                return std::log(sf(y));
        }
        return 0.0;
    }

    double log_cdf(double y) const noexcept {
        switch (kind_) {
            case DisorderKind::gaussian:
                return norm_log_cdf(y / p1_);
            default:
                return std::log(cdf(y));
        }
    }

    // Quantile H^{-1}(p), p in (0,1); closed form except gamma (Halley).
    double quantile(double p) const {
        if (!(p > 0.0 && p < 1.0)) {
            throw std::domain_error("quantile: p must lie in (0,1)");
        }
        switch (kind_) {
            case DisorderKind::gaussian:
                return p1_ * norm_quantile(p);
            case DisorderKind::centered_exponential:
                return (-std::log1p(-p) - 1.0) / p1_;
            case DisorderKind::centered_gamma:
                return p2_ * gamma_p_inv(p1_, p) - p1_ * p2_;
            case DisorderKind::centered_uniform:
                return p1_ * (2.0 * p - 1.0);
        }
        return 0.0;
    }

private:
    DisorderModel(DisorderKind k, double a, double b) : kind_(k), p1_(a), p2_(b) {}

    static void require_positive(double v, const char* name) {
        if (!(v > 0.0)) {
            throw std::invalid_argument(std::string("DisorderModel: ") + name +
                                        " must be positive");
        }
    }

    // log(sinh(x)/x), even in x; series below 1e-2 to avoid 0/0 and keep
    // full precision near the origin.
    static double log_sinhc(double x) noexcept {
        const double ax = std::fabs(x);
        if (ax < 1e-2) {
            const double x2 = x * x;
            return x2 / 6.0 - x2 * x2 / 180.0 + x2 * x2 * x2 / 2835.0;
        }
        // log(sinh x / x) = |x| + log1p(-exp(-2|x|)) - log(2|x|)
        return ax + std::log1p(-std::exp(-2.0 * ax)) - std::log(2.0 * ax);
    }

    DisorderKind kind_;
    double p1_;
    double p2_;
};

} // namespace polymerlab
