// Monte Carlo experiment drivers over independent disorder replicas:
// replica statistics of log Z, free-energy estimation, concentration tail
// profiles on the sqrt(N/log N) scale, convergence-rate gaps, single-site
// influence (resampling sensitivity), and scaling-exponent diagnostics.
//
// Replica r always uses replica_index = r, work items write only to their
// own slot, and summaries are folded in replica order, so every report is
// a pure function of (inputs, base_seed) independent of the thread count.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "polymerlab/environment.hpp"
#include "polymerlab/errors.hpp"
#include "polymerlab/parallel.hpp"
#include "polymerlab/polymer.hpp"
#include "polymerlab/stats.hpp"

namespace polymerlab {

inline constexpr std::array<double, 7> kQuantileProbs = {0.01, 0.05, 0.25, 0.50,
                                                         0.75, 0.95, 0.99};

struct ReplicaEntry {
    std::int64_t N = 0;
    std::int64_t R = 0;
    double mean = 0.0;
    double variance = 0.0; // unbiased
    double stderr_of_mean = 0.0;
    std::array<double, 7> quantiles{}; // 1,5,25,50,75,95,99 %
    double mean_msd = 0.0;             // Gibbs endpoint E_mu |x_N|^2, replica mean
    double msd_stderr = 0.0;
    std::vector<double> log_z; // per-replica values in replica order
};

struct ReplicaStats {
    double beta = 0.0;
    std::uint64_t base_seed = 0;
    std::vector<ReplicaEntry> entries; // N_grid order
};

namespace detail {

template <int D>
double endpoint_msd(const LogZField<D>& field, double log_z) {
    if (log_z == kNegInf) return 0.0;
    double s = 0.0;
    for (std::size_t i = 0; i < field.size(); ++i) {
        const double w = field.values()[i];
        if (w == kNegInf) continue;
        const Coord<D> x = field.coord_at(i);
        double r2 = 0.0;
        for (int k = 0; k < D; ++k) {
            const double c = static_cast<double>(x[static_cast<std::size_t>(k)]);
            r2 += c * c;
        }
        s += std::exp(w - log_z) * r2;
    }
    return s;
}

inline void check_memory_cap(std::int64_t max_N, int D, int threads, std::int64_t R,
                             std::size_t n_entries, double max_memory_mb) {
    const double layer = (D == 1) ? static_cast<double>(max_N + 1)
                                  : static_cast<double>(max_N + 1) * static_cast<double>(max_N + 1);
    const double bytes = 2.0 * layer * 8.0 * std::max(threads, 1) +
                         16.0 * static_cast<double>(R) * static_cast<double>(n_entries);
    const double mb = bytes / (1024.0 * 1024.0);
    if (mb > max_memory_mb) {
        throw CapExceeded("run_replicas: estimated working memory " + std::to_string(mb) +
                          " MB exceeds cap " + std::to_string(max_memory_mb) + " MB");
    }
}

} // namespace detail

// Replica statistics of log Z_N for each N in the grid.
template <int D>
ReplicaStats run_replicas(const DisorderModel& model, double beta,
                          const std::vector<std::int64_t>& N_grid, std::int64_t R,
                          std::uint64_t base_seed, int threads = 1,
                          double max_memory_mb = 4096.0) {
    if (R < 2) throw std::invalid_argument("run_replicas: need R >= 2");
    if (N_grid.empty()) throw std::invalid_argument("run_replicas: empty N grid");
    std::int64_t max_N = 0;
    for (const auto n : N_grid) {
        if (n < 1) throw std::invalid_argument("run_replicas: every N must be >= 1");
        max_N = std::max(max_N, n);
    }
    detail::check_memory_cap(max_N, D, threads, R, N_grid.size(), max_memory_mb);

    ReplicaStats stats;
    stats.beta = beta;
    stats.base_seed = base_seed;
    for (const std::int64_t N : N_grid) {
        const PolymerParams params{N, beta};
        std::vector<double> logz(static_cast<std::size_t>(R));
        std::vector<double> msd(static_cast<std::size_t>(R));
        parallel_for(R, threads, [&](std::int64_t r) {
            const Environment<D> env(model, base_seed, r);
            const auto field = log_partition_field<D>(env, params);
            const double lz = field.logsumexp();
            logz[static_cast<std::size_t>(r)] = lz;
            msd[static_cast<std::size_t>(r)] = detail::endpoint_msd<D>(field, lz);
        });
        ReplicaEntry e;
        e.N = N;
        e.R = R;
        const auto mv = mean_var(logz);
        e.mean = mv.mean;
        e.variance = mv.variance;
        e.stderr_of_mean = mv.stderr_of_mean;
        std::vector<double> sorted = logz;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t q = 0; q < kQuantileProbs.size(); ++q) {
            e.quantiles[q] = quantile_sorted(sorted, kQuantileProbs[q]);
        }
        const auto mmsd = mean_var(msd);
        e.mean_msd = mmsd.mean;
        e.msd_stderr = mmsd.stderr_of_mean;
        e.log_z = std::move(logz);
        stats.entries.push_back(std::move(e));
    }
    return stats;
}

// Plug-in free energy: p_hat = max over the grid of mean(log Z_N)/N.
// Superadditivity of the mean makes this a lower-biased estimate of the
// true limit, so downstream gap checks are one-sided.
struct FreeEnergyEstimate {
    double p_hat = 0.0;
    std::int64_t argmax_N = 0;
    double stderr_at_argmax = 0.0;
};

inline FreeEnergyEstimate estimate_free_energy(const ReplicaStats& stats) {
    if (stats.entries.empty()) throw std::invalid_argument("estimate_free_energy: empty stats");
    FreeEnergyEstimate est;
    bool first = true;
    for (const auto& e : stats.entries) {
        const double v = e.mean / static_cast<double>(e.N);
        if (first || v > est.p_hat) {
            est.p_hat = v;
            est.argmax_N = e.N;
            est.stderr_at_argmax = e.stderr_of_mean / static_cast<double>(e.N);
            first = false;
        }
    }
    return est;
}

// Empirical exceedance of |log Z - mean| on the subgaussian scale
// sqrt(N / log N), with a log-linear tail fit over the window where the
// exceedance is resolvable ([10/R, 0.5]).
struct TailProfile {
    std::int64_t N = 0;
    std::int64_t R = 0;
    double scale = 0.0; // sqrt(N/log N)
    std::vector<double> t_grid;
    std::vector<double> exceedance;
    bool degenerate = false;     // zero-variance input (beta = 0)
    bool small_sample = false;   // R < 1000: tail estimates are coarse
    bool slope_defined = false;  // enough window points for the fit
    double fitted_log_slope = 0.0;
    double fit_r_squared = 0.0;
    double window_lo = 0.0; // exceedance window used for the fit
    double window_hi = 0.5;
};

template <int D>
TailProfile concentration_profile(const DisorderModel& model, const PolymerParams& params,
                                  std::int64_t R, const std::vector<double>& t_grid,
                                  std::uint64_t base_seed, int threads = 1) {
    validate(params);
    if (R < 2) throw std::invalid_argument("concentration_profile: need R >= 2");
    if (t_grid.empty()) throw std::invalid_argument("concentration_profile: empty t grid");
    if (params.N < 2) {
        throw std::invalid_argument("concentration_profile: need N >= 2 (log N > 0)");
    }
    std::vector<double> logz(static_cast<std::size_t>(R));
    parallel_for(R, threads, [&](std::int64_t r) {
        const Environment<D> env(model, base_seed, r);
        logz[static_cast<std::size_t>(r)] = log_partition<D>(env, params);
    });
    const auto mv = mean_var(logz);

    TailProfile profile;
    profile.N = params.N;
    profile.R = R;
    profile.scale = std::sqrt(static_cast<double>(params.N) /
                              std::log(static_cast<double>(params.N)));
    profile.t_grid = t_grid;
    profile.window_lo = 10.0 / static_cast<double>(R);
    profile.exceedance.reserve(t_grid.size());
    for (const double t : t_grid) {
        const double thr = t * profile.scale;
        std::int64_t count = 0;
        for (const double v : logz) {
            if (std::fabs(v - mv.mean) > thr) ++count;
        }
        profile.exceedance.push_back(static_cast<double>(count) / static_cast<double>(R));
    }
    profile.degenerate = (mv.variance == 0.0);
    profile.small_sample = (R < 1000);
    if (!profile.degenerate) {
        std::vector<double> xs, ys;
        for (std::size_t i = 0; i < t_grid.size(); ++i) {
            const double e = profile.exceedance[i];
            if (t_grid[i] > 0.0 && e >= profile.window_lo && e <= profile.window_hi) {
                xs.push_back(t_grid[i]);
                ys.push_back(std::log(e));
            }
        }
        if (xs.size() >= 2) {
            const LinearFit fit = linear_fit(xs, ys);
            profile.slope_defined = true;
            profile.fitted_log_slope = fit.slope;
            profile.fit_r_squared = fit.r_squared;
        }
    }
    return profile;
}

// Convergence-rate report: gap(N) = N*p_hat - mean(log Z_N), plus the gap
// normalized by sqrt(N/log N) * log log N (defined for N >= 3 only).
struct RateEntry {
    std::int64_t N = 0;
    double gap = 0.0;
    double gap_stderr = 0.0;
    bool normalized_defined = false;
    double normalized_gap = 0.0;
};

struct RateReport {
    double p_hat = 0.0;
    std::vector<RateEntry> entries;
};

inline RateReport convergence_gap(const ReplicaStats& stats, double p_hat) {
    RateReport rep;
    rep.p_hat = p_hat;
    for (const auto& e : stats.entries) {
        RateEntry r;
        r.N = e.N;
        r.gap = static_cast<double>(e.N) * p_hat - e.mean;
        r.gap_stderr = e.stderr_of_mean;
        if (e.N >= 3) {
            const double n = static_cast<double>(e.N);
            const double denom = std::sqrt(n / std::log(n)) * std::log(std::log(n));
            r.normalized_defined = true;
            r.normalized_gap = r.gap / denom;
        }
        rep.entries.push_back(r);
    }
    return rep;
}

// Single-site influence by independent resampling. For each replica omega
// and probed site, the inner integral over the resampled coordinate is
// approximated with `resamples` fresh draws; second moments of the inner
// integral use the unbiased pair estimator (sum^2 - sum of squares) /
// (K (K-1)) so the K-sample approximation does not bias them upward.
struct InfluenceSite {
    std::int64_t m = 0;
    std::vector<std::int64_t> y;
    bool reachable_site = true;
    // F = log Z (point-to-line), absolute difference:
    double y_mean = 0.0;      // E[Y^{(m,y)}]
    double y2_mean = 0.0;     // E[(Y^{(m,y)})^2]
    double y2_stderr = 0.0;
    // F = log Z_N(z) (point-to-point), when an endpoint is given:
    double l2_mean = 0.0;     // E[(L^{(m,y)}(z))^2]
    double l2_stderr = 0.0;
    double lplus2_mean = 0.0; // E[(L_+^{(m,y)}(z))^2], the bounded quantity
    double lplus2_stderr = 0.0;
};

struct InfluenceReport {
    std::int64_t N = 0;
    double beta = 0.0;
    std::int64_t R = 0;
    std::int64_t resamples = 0;
    bool has_endpoint = false;
    std::vector<std::int64_t> endpoint;
    std::vector<InfluenceSite> sites;
    // Sum over the probed sites of Y^{(m,y)}, replica-averaged: a lower
    // bound for E[Y_N] unless the probe set covers the whole cone.
    double y_sum_mean = 0.0;
    double y_sum_stderr = 0.0;
    bool full_coverage = false;
};

namespace detail {

inline constexpr std::uint64_t kTagInfluence = 0x706f6c79696e66ULL; // "polyinf"

struct PairMoments {
    double mean_abs = 0.0;   // (1/K) sum |d_j|
    double sq_abs = 0.0;     // unbiased estimate of (integral |d|)^2
    double sq_plus = 0.0;    // unbiased estimate of (integral d_+)^2
};

inline PairMoments pair_moments(std::span<const double> deltas) {
    const std::size_t K = deltas.size();
    double s_abs = 0.0, q_abs = 0.0, s_plus = 0.0, q_plus = 0.0;
    for (const double d : deltas) {
        const double a = std::fabs(d);
        const double p = d > 0.0 ? d : 0.0;
        s_abs += a;
        q_abs += a * a;
        s_plus += p;
        q_plus += p * p;
    }
    PairMoments pm;
    const double k = static_cast<double>(K);
    pm.mean_abs = s_abs / k;
    if (K >= 2) {
        pm.sq_abs = (s_abs * s_abs - q_abs) / (k * (k - 1.0));
        pm.sq_plus = (s_plus * s_plus - q_plus) / (k * (k - 1.0));
    } else {
        pm.sq_abs = s_abs * s_abs;
        pm.sq_plus = s_plus * s_plus;
    }
    return pm;
}

} // namespace detail

template <int D>
InfluenceReport site_influence(const DisorderModel& model, const PolymerParams& params,
                               const std::vector<Site<D>>& probe_sites,
                               const std::optional<Coord<D>>& endpoint, std::int64_t R,
                               std::int64_t resamples, std::uint64_t base_seed,
                               int threads = 1) {
    validate(params);
    if (R < 2) throw std::invalid_argument("site_influence: need R >= 2");
    if (resamples < 2) throw std::invalid_argument("site_influence: need >= 2 resamples");
    if (probe_sites.empty()) throw std::invalid_argument("site_influence: no probe sites");

    const std::size_t S = probe_sites.size();
    std::vector<bool> ok(S);
    for (std::size_t s = 0; s < S; ++s) {
        ok[s] = probe_sites[s].n >= 1 && probe_sites[s].n <= params.N &&
                reachable<D>(probe_sites[s].n, probe_sites[s].x);
    }

    // Per-replica raw rows: [site][replica] for each statistic.
    std::vector<std::vector<double>> y_hat(S), y_sq(S), l_sq(S), lp_sq(S);
    for (std::size_t s = 0; s < S; ++s) {
        y_hat[s].assign(static_cast<std::size_t>(R), 0.0);
        y_sq[s].assign(static_cast<std::size_t>(R), 0.0);
        l_sq[s].assign(static_cast<std::size_t>(R), 0.0);
        lp_sq[s].assign(static_cast<std::size_t>(R), 0.0);
    }
    std::vector<double> y_sum(static_cast<std::size_t>(R), 0.0);

    parallel_for(R, threads, [&](std::int64_t r) {
        const Environment<D> env(model, base_seed, r);
        const auto base = forward_field<D>(env, Site<D>{}, params.N, params.beta);
        const double f_line = base.logsumexp();
        const double f_p2p = endpoint ? base.at(*endpoint) : kNegInf;
        std::vector<double> d_line(static_cast<std::size_t>(resamples));
        std::vector<double> d_p2p(static_cast<std::size_t>(resamples));
        for (std::size_t s = 0; s < S; ++s) {
            if (!ok[s]) continue;
            for (std::int64_t j = 0; j < resamples; ++j) {
                std::uint64_t fresh = hash_chain(detail::kTagInfluence, base_seed);
                fresh = hash_chain(fresh, static_cast<std::uint64_t>(r));
                fresh = hash_chain(fresh, static_cast<std::uint64_t>(s));
                fresh = hash_chain(fresh, static_cast<std::uint64_t>(j));
                const auto envj = env.resample_site(probe_sites[s], fresh);
                const auto fieldj = forward_field<D>(envj, Site<D>{}, params.N, params.beta);
                d_line[static_cast<std::size_t>(j)] = fieldj.logsumexp() - f_line;
                d_p2p[static_cast<std::size_t>(j)] =
                    endpoint ? fieldj.at(*endpoint) - f_p2p : 0.0;
            }
            const auto line = detail::pair_moments(d_line);
            y_hat[s][static_cast<std::size_t>(r)] = line.mean_abs;
            y_sq[s][static_cast<std::size_t>(r)] = line.sq_abs;
            y_sum[static_cast<std::size_t>(r)] += line.mean_abs;
            if (endpoint) {
                const auto p2p = detail::pair_moments(d_p2p);
                l_sq[s][static_cast<std::size_t>(r)] = p2p.sq_abs;
                lp_sq[s][static_cast<std::size_t>(r)] = p2p.sq_plus;
            }
        }
    });

    InfluenceReport rep;
    rep.N = params.N;
    rep.beta = params.beta;
    rep.R = R;
    rep.resamples = resamples;
    rep.has_endpoint = endpoint.has_value();
    if (endpoint) {
        rep.endpoint.assign(endpoint->begin(), endpoint->end());
    }
    for (std::size_t s = 0; s < S; ++s) {
        InfluenceSite site;
        site.m = probe_sites[s].n;
        site.y.assign(probe_sites[s].x.begin(), probe_sites[s].x.end());
        site.reachable_site = ok[s];
        if (ok[s]) {
            site.y_mean = mean_var(y_hat[s]).mean;
            const auto m2 = mean_var(y_sq[s]);
            site.y2_mean = m2.mean;
            site.y2_stderr = m2.stderr_of_mean;
            if (endpoint) {
                const auto l2 = mean_var(l_sq[s]);
                site.l2_mean = l2.mean;
                site.l2_stderr = l2.stderr_of_mean;
                const auto lp = mean_var(lp_sq[s]);
                site.lplus2_mean = lp.mean;
                site.lplus2_stderr = lp.stderr_of_mean;
            }
        }
        rep.sites.push_back(std::move(site));
    }
    const auto ys = mean_var(y_sum);
    rep.y_sum_mean = ys.mean;
    rep.y_sum_stderr = ys.stderr_of_mean;
    std::size_t cone = 0;
    for (std::int64_t m = 1; m <= params.N; ++m) cone += LayerIndex<D>(m).size();
    rep.full_coverage = (S == cone);
    return rep;
}

// Scaling-exponent diagnostics: chi from Var(log Z_N) ~ N^{2 chi}, xi from
// E_mu |x_N|^2 ~ N^{2 xi}, by least squares in log-log coordinates. The
// hyperscaling residual chi - (2 xi - 1) is reported as a diagnostic only.
struct ExponentReport {
    bool chi_defined = false;
    double chi_hat = 0.0;
    double chi_r_squared = 0.0;
    double xi_hat = 0.0;
    double xi_r_squared = 0.0;
    bool hyperscaling_defined = false;
    double hyperscaling_residual = 0.0;
};

inline ExponentReport scaling_exponents(const ReplicaStats& stats,
                                        const std::vector<double>& msd_per_N) {
    if (stats.entries.size() < 4) {
        throw std::invalid_argument("scaling_exponents: need >= 4 grid points");
    }
    if (msd_per_N.size() != stats.entries.size()) {
        throw std::invalid_argument("scaling_exponents: msd list must match the N grid");
    }
    std::vector<double> logN, logVar, logMsd;
    bool var_ok = true;
    for (std::size_t i = 0; i < stats.entries.size(); ++i) {
        const auto& e = stats.entries[i];
        logN.push_back(std::log(static_cast<double>(e.N)));
        if (e.variance > 0.0) {
            logVar.push_back(std::log(e.variance));
        } else {
            var_ok = false;
        }
        if (!(msd_per_N[i] > 0.0)) {
            throw std::invalid_argument("scaling_exponents: msd values must be positive");
        }
        logMsd.push_back(std::log(msd_per_N[i]));
    }
    ExponentReport rep;
    const LinearFit xi = linear_fit(logN, logMsd);
    rep.xi_hat = 0.5 * xi.slope;
    rep.xi_r_squared = xi.r_squared;
    if (var_ok) {
        const LinearFit chi = linear_fit(logN, logVar);
        rep.chi_defined = true;
        rep.chi_hat = 0.5 * chi.slope;
        rep.chi_r_squared = chi.r_squared;
        rep.hyperscaling_defined = true;
        rep.hyperscaling_residual = rep.chi_hat - (2.0 * rep.xi_hat - 1.0);
    }
    return rep;
}

inline ExponentReport scaling_exponents(const ReplicaStats& stats) {
    std::vector<double> msd;
    msd.reserve(stats.entries.size());
    for (const auto& e : stats.entries) msd.push_back(e.mean_msd);
    return scaling_exponents(stats, msd);
}

} // namespace polymerlab
