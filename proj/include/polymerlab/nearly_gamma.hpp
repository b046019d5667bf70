// Numerical nearly-gamma certifier.
//
// A law with density h and CDF H is nearly gamma with parameters (A, B)
// when psi(y) = phi(Phi^{-1}(H(y))) / h(y) satisfies psi(y)^2 <= B + A|y|
// on the support (the squared form of the envelope; equivalent to the
// square-root form). psi is the derivative of the transport map
// T = H^{-1} o Phi that pushes a standard gaussian onto the law, and the
// envelope yields an exponential moment for every t < 2/A.
//
// A grid can only certify up to its resolution, so the report is a
// numerical certificate: envelope fit on the grid plus the two sufficient
// tail conditions (iv) finite-endpoint density exponent and (v) hazard-
// ratio boundedness, each checked on geometric sequences.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "polymerlab/disorder.hpp"
#include "polymerlab/errors.hpp"
#include "polymerlab/special.hpp"
#include "polymerlab/stats.hpp"

namespace polymerlab {

// Density/CDF/quantile evaluators for one law. log_* evaluators keep tail
// information long after the plain ones underflow.
struct DensitySpec {
    std::string name;
    double lo = kNegInf;
    double hi = kInf;
    std::function<double(double)> pdf;
    std::function<double(double)> log_pdf;
    std::function<double(double)> cdf;
    std::function<double(double)> sf;
    std::function<double(double)> log_cdf;
    std::function<double(double)> log_sf;
    std::function<double(double)> quantile;       // p in (0,1)
    std::function<double(double)> quantile_upper; // s in (0,1): y with sf(y) = s
};

inline DensitySpec make_density_spec(const DisorderModel& m) {
    DensitySpec s;
    s.name = kind_name(m.kind());
    const auto sup = m.support();
    s.lo = sup.first;
    s.hi = sup.second;
    s.pdf = [m](double y) { return m.pdf(y); };
    s.log_pdf = [m](double y) { return m.log_pdf(y); };
    s.cdf = [m](double y) { return m.cdf(y); };
    s.sf = [m](double y) { return m.sf(y); };
    s.log_cdf = [m](double y) { return m.log_cdf(y); };
    s.log_sf = [m](double y) { return m.log_sf(y); };
    s.quantile = [m](double p) { return m.quantile(p); };
    switch (m.kind()) {
        case DisorderKind::gaussian: {
            const double sigma = m.param1();
            s.quantile_upper = [sigma](double q) { return -sigma * norm_quantile(q); };
            break;
        }
        case DisorderKind::centered_exponential: {
            const double rate = m.param1();
            s.quantile_upper = [rate](double q) { return (-std::log(q) - 1.0) / rate; };
            break;
        }
        case DisorderKind::centered_uniform: {
            const double a = m.param1();
            s.quantile_upper = [a](double q) { return a * (1.0 - 2.0 * q); };
            break;
        }
        default:
            s.quantile_upper = [m](double q) { return m.quantile(1.0 - q); };
            break;
    }
    return s;
}

inline DensitySpec standard_normal_spec() {
    return make_density_spec(DisorderModel::make_gaussian(1.0));
}

// Density given by a table of (y, h(y), H(y)) rows, linearly interpolated.
// Supports the CSV input route of the certifier CLI; the support is the
// table range.
inline DensitySpec tabulated_spec(std::vector<double> y, std::vector<double> h,
                                  std::vector<double> H, std::string name = "tabulated") {
    const std::size_t n = y.size();
    if (n < 2 || h.size() != n || H.size() != n) {
        throw std::invalid_argument("tabulated_spec: need >= 2 aligned (y, h, H) rows");
    }
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (!(y[i] < y[i + 1])) {
            throw std::invalid_argument("tabulated_spec: y must be strictly increasing");
        }
        if (H[i + 1] < H[i]) {
            throw std::invalid_argument("tabulated_spec: H must be nondecreasing");
        }
    }
    auto ys = std::make_shared<std::vector<double>>(std::move(y));
    auto hs = std::make_shared<std::vector<double>>(std::move(h));
    auto Hs = std::make_shared<std::vector<double>>(std::move(H));
    auto interp = [](const std::vector<double>& xs, const std::vector<double>& vs, double x) {
        const auto it = std::upper_bound(xs.begin(), xs.end(), x);
        if (it == xs.begin()) return vs.front();
        if (it == xs.end()) return vs.back();
        const std::size_t j = static_cast<std::size_t>(it - xs.begin());
        const double f = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
        return vs[j - 1] + f * (vs[j] - vs[j - 1]);
    };
    DensitySpec s;
    s.name = std::move(name);
    s.lo = ys->front();
    s.hi = ys->back();
    s.pdf = [=](double x) { return interp(*ys, *hs, x); };
    s.log_pdf = [=](double x) { return std::log(interp(*ys, *hs, x)); };
    s.cdf = [=](double x) { return interp(*ys, *Hs, x); };
    s.sf = [=](double x) { return 1.0 - interp(*ys, *Hs, x); };
    s.log_cdf = [=](double x) { return std::log(interp(*ys, *Hs, x)); };
    s.log_sf = [=](double x) { return std::log1p(-interp(*ys, *Hs, x)); };
    s.quantile = [=](double p) {
        const auto it = std::lower_bound(Hs->begin(), Hs->end(), p);
        if (it == Hs->begin()) return ys->front();
        if (it == Hs->end()) return ys->back();
        const std::size_t j = static_cast<std::size_t>(it - Hs->begin());
        const double denom = (*Hs)[j] - (*Hs)[j - 1];
        const double f = denom > 0.0 ? (p - (*Hs)[j - 1]) / denom : 0.0;
        return (*ys)[j - 1] + f * ((*ys)[j] - (*ys)[j - 1]);
    };
    s.quantile_upper = [q = s.quantile](double sv) { return q(1.0 - sv); };
    return s;
}

struct PsiValue {
    double value = 0.0;
    bool tail_asymptotic = false; // evaluated through the log-tail route
};

namespace detail {

// Solve Phi-bar(q) = exp(L) for large q given very negative L, via the
// Mills-ratio fixed point q^2 = -2(L + log q + log sqrt(2 pi)).
inline double quantile_from_log_tail(double L) {
    double q = std::sqrt(-2.0 * L);
    for (int i = 0; i < 4; ++i) {
        q = std::sqrt(-2.0 * (L + std::log(q) + kLogSqrt2Pi));
    }
    return q;
}

} // namespace detail

// psi(y) = phi(Phi^{-1}(H(y))) / h(y). Uses whichever of H(y), 1-H(y) is
// smaller for full relative precision; beyond double range it switches to
// log-tail asymptotics and flags the value.
inline PsiValue psi_point(const DensitySpec& spec, double y) {
    if (!(y > spec.lo && y < spec.hi)) {
        throw std::domain_error("psi: y=" + std::to_string(y) + " outside the support of " +
                                spec.name);
    }
    const double logh = spec.log_pdf(y);
    if (!(logh > kNegInf)) {
        throw std::domain_error("psi: density vanishes at y=" + std::to_string(y));
    }
    const double p = spec.cdf(y);
    const double s = spec.sf(y);
    PsiValue out;
    if (p > 0.0 && s > 0.0) {
        const double q = (p <= s) ? norm_quantile(p) : -norm_quantile(s);
        out.value = std::exp(norm_log_pdf(q) - logh);
        return out;
    }
    // One tail probability underflowed: work from its log.
    const double L = (s <= 0.0) ? spec.log_sf(y) : spec.log_cdf(y);
    if (!(L < 0.0) || !std::isfinite(L)) {
        throw NumericError("psi: cannot evaluate tail at y=" + std::to_string(y));
    }
    const double q = detail::quantile_from_log_tail(L);
    const double z = 1.0 / (q * q);
    const double mills = (1.0 - z * (1.0 - 3.0 * z)) / q; // Phi-bar/phi at q
    out.value = std::exp(L - std::log(mills) - logh);
    out.tail_asymptotic = true;
    return out;
}

inline double psi(const DensitySpec& spec, double y) { return psi_point(spec, y).value; }

struct ConditionIVReport {
    bool applicable = false;
    bool pass = false;
    double endpoint = 0.0;
    double alpha_estimate = 0.0;
    double ratio_band = 0.0; // max/min of compensated ratio h / dist^alpha
    std::string side;        // "left" or "right"
};

struct ConditionVReport {
    bool applicable = false;
    bool pass = false;
    double ratio_min = 0.0;
    double ratio_max = 0.0;
    std::string side; // "upper" or "lower"
    std::string note;
};

struct NearlyGammaReport {
    std::string law;
    std::vector<double> grid;
    std::vector<double> psi_values;
    std::vector<char> tail_flagged;
    double B = 0.0;
    double A_fit = 0.0;
    double witness_y = 0.0;       // grid point attaining the envelope max
    double moment_threshold = 0.0; // 2/A_fit; +inf when A_fit = 0
    std::vector<ConditionIVReport> cond_iv;
    std::vector<ConditionVReport> cond_v;
};

// Smallest A with psi(y)^2 <= B + A|y| on the grid.
inline NearlyGammaReport fit_envelope(const DensitySpec& spec, const std::vector<double>& grid,
                                      double B) {
    if (grid.empty()) throw std::invalid_argument("fit_envelope: empty grid");
    if (!(B >= 0.0)) throw std::invalid_argument("fit_envelope: B must be nonnegative");
    NearlyGammaReport rep;
    rep.law = spec.name;
    rep.grid = grid;
    rep.B = B;
    rep.psi_values.reserve(grid.size());
    rep.tail_flagged.reserve(grid.size());
    double A = 0.0;
    double witness = grid.front();
    for (const double y : grid) {
        const PsiValue pv = psi_point(spec, y);
        rep.psi_values.push_back(pv.value);
        rep.tail_flagged.push_back(pv.tail_asymptotic ? 1 : 0);
        const double ay = std::fabs(y);
        // 1e-12 deadband: psi^2 <= B + A|y| is only ever asserted to that
        // slack, so excesses at evaluation-roundoff level do not inflate A.
        const double excess = pv.value * pv.value - B;
        if (ay > 0.0 && excess > 1e-12) {
            const double need = excess / ay;
            if (need > A) {
                A = need;
                witness = y;
            }
        }
    }
    rep.A_fit = std::max(A, 0.0);
    rep.witness_y = witness;
    rep.moment_threshold = (rep.A_fit > 0.0) ? 2.0 / rep.A_fit : kInf;
    return rep;
}

// Default envelope offset: a hair above the largest psi^2 near the origin.
inline double default_envelope_B(const DensitySpec& spec, const std::vector<double>& grid) {
    double m = 0.0;
    bool any = false;
    for (const double y : grid) {
        if (std::fabs(y) <= 1.0) {
            const double v = psi(spec, y);
            m = std::max(m, v * v);
            any = true;
        }
    }
    if (!any) {
        for (const double y : grid) {
            const double v = psi(spec, y);
            m = std::max(m, v * v);
        }
    }
    return 1.05 * m;
}

enum class EndpointSide { left, right };
enum class TailSide { lower, upper };

// Condition (iv): near a finite endpoint nu, h(x)/|x - nu|^alpha should be
// bounded away from 0 and infinity for some alpha > -1. The exponent is
// estimated by log-log regression on a geometric approach sequence; PASS
// needs alpha > -1 and a compensated ratio band <= 10.
inline ConditionIVReport check_condition_iv(const DensitySpec& spec, double endpoint,
                                            EndpointSide side) {
    if (!std::isfinite(endpoint)) {
        throw std::invalid_argument("check_condition_iv: endpoint must be finite");
    }
    ConditionIVReport rep;
    rep.applicable = true;
    rep.endpoint = endpoint;
    rep.side = (side == EndpointSide::left) ? "left" : "right";
    const double sign = (side == EndpointSide::left) ? 1.0 : -1.0;
    double span = 1.0;
    if (std::isfinite(spec.lo) && std::isfinite(spec.hi)) span = spec.hi - spec.lo;
    const double d0 = std::min(1.0, 0.25 * span);

    std::vector<double> logd, logh;
    for (int j = 0; j < 24; ++j) {
        const double d = d0 * std::pow(0.5, j);
        if (d < 1e-10) break;
        const double x = endpoint + sign * d;
        if (!(x > spec.lo && x < spec.hi)) continue;
        const double lh = spec.log_pdf(x);
        if (!std::isfinite(lh)) continue;
        logd.push_back(std::log(d));
        logh.push_back(lh);
    }
    if (logd.size() < 6) {
        throw NumericError("check_condition_iv: too few usable points near endpoint " +
                           std::to_string(endpoint));
    }
    const LinearFit fit = linear_fit(logd, logh);
    rep.alpha_estimate = fit.slope;
    double cmin = kInf, cmax = kNegInf;
    for (std::size_t i = 0; i < logd.size(); ++i) {
        const double c = logh[i] - fit.slope * logd[i];
        cmin = std::min(cmin, c);
        cmax = std::max(cmax, c);
    }
    rep.ratio_band = std::exp(cmax - cmin);
    rep.pass = (rep.alpha_estimate > -1.0) && (rep.ratio_band <= 10.0);
    return rep;
}

// Condition (v): on an infinite tail, the hazard-type ratio
// (tail probability)/(density) should stay inside a bounded band. PASS
// needs max/min <= 10 over a geometric sequence. The condition is
// sufficient, not necessary: a gaussian fails it yet is nearly gamma
// directly through psi == 1.
inline ConditionVReport check_condition_v(const DensitySpec& spec, TailSide side) {
    ConditionVReport rep;
    rep.side = (side == TailSide::upper) ? "upper" : "lower";
    const bool infinite =
        (side == TailSide::upper) ? !std::isfinite(spec.hi) : !std::isfinite(spec.lo);
    if (!infinite) {
        throw std::invalid_argument("check_condition_v: the " + rep.side +
                                    " tail is not infinite");
    }
    rep.applicable = true;
    double x0;
    if (side == TailSide::upper) {
        x0 = std::max(spec.quantile(0.9), 1.0);
    } else {
        x0 = std::min(spec.quantile(0.1), -1.0);
    }
    rep.ratio_min = kInf;
    rep.ratio_max = kNegInf;
    for (int j = 0; j < 16; ++j) {
        const double x = x0 * std::pow(1.5, j);
        const double lt = (side == TailSide::upper) ? spec.log_sf(x) : spec.log_cdf(x);
        const double lh = spec.log_pdf(x);
        if (!std::isfinite(lt) || !std::isfinite(lh)) break;
        const double ratio = std::exp(lt - lh);
        rep.ratio_min = std::min(rep.ratio_min, ratio);
        rep.ratio_max = std::max(rep.ratio_max, ratio);
    }
    if (!(rep.ratio_min > 0.0) || !std::isfinite(rep.ratio_max)) {
        throw NumericError("check_condition_v: ratio sequence degenerate on " + rep.side +
                           " tail");
    }
    rep.pass = rep.ratio_max / rep.ratio_min <= 10.0;
    return rep;
}

// T(xi) = H^{-1}(Phi(xi)): pushes a standard gaussian onto the law.
inline double gaussian_transport(const DensitySpec& spec, double xi) {
    if (!std::isfinite(xi)) {
        throw std::invalid_argument("gaussian_transport: xi must be finite");
    }
    double y;
    if (xi <= 0.0) {
        y = spec.quantile(norm_cdf(xi));
    } else if (spec.quantile_upper) {
        y = spec.quantile_upper(norm_sf(xi));
    } else {
        y = spec.quantile(norm_cdf(xi));
    }
    if (!std::isfinite(y)) {
        throw NumericError("gaussian_transport: quantile evaluation failed at xi=" +
                           std::to_string(xi));
    }
    return y;
}

// Exponential-moment certificate: E[exp(t omega)] is finite for every
// t < 2/A. Advisory for the 4*beta moment hypothesis of the concentration
// experiments.
inline bool exp_moment_certificate(const NearlyGammaReport& rep, double t) {
    if (rep.A_fit <= 0.0) return true;
    return t < 2.0 / rep.A_fit;
}

// Full certificate: envelope fit plus the applicable tail conditions.
inline NearlyGammaReport certify(const DensitySpec& spec, const std::vector<double>& grid,
                                 double B) {
    NearlyGammaReport rep = fit_envelope(spec, grid, B);
    if (std::isfinite(spec.lo)) {
        rep.cond_iv.push_back(check_condition_iv(spec, spec.lo, EndpointSide::left));
    }
    if (std::isfinite(spec.hi)) {
        rep.cond_iv.push_back(check_condition_iv(spec, spec.hi, EndpointSide::right));
    }
    if (!std::isfinite(spec.hi)) {
        auto v = check_condition_v(spec, TailSide::upper);
        if (!v.pass) {
            v.note = "condition (v) is sufficient, not necessary; the envelope fit on the "
                     "grid stands on its own";
        }
        rep.cond_v.push_back(std::move(v));
    }
    if (!std::isfinite(spec.lo)) {
        auto v = check_condition_v(spec, TailSide::lower);
        if (!v.pass) {
            v.note = "condition (v) is sufficient, not necessary; the envelope fit on the "
                     "grid stands on its own";
        }
        rep.cond_v.push_back(std::move(v));
    }
    return rep;
}

} // namespace polymerlab
