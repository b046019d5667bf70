// Coarse-graining vocabulary at computable scale: simple-skeleton
// extraction and enumeration, the exact skeleton decomposition identity,
// the s(n,x) inefficiency surface, the slowly-varying scale functions
// rho/theta/phi, and the adequate/efficient classification with h_n and
// the coarse-graining scale u_n.

#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "polymerlab/environment.hpp"
#include "polymerlab/parallel.hpp"
#include "polymerlab/polymer.hpp"
#include "polymerlab/stats.hpp"

namespace polymerlab {

// rho(m) = log log m / (K13 sqrt(log m)), theta(m) = (log m)^{5/2},
// phi(m) = floor((log m)^3). Defined for m >= 3 (log log m > 0 there).
// The exponents are the default choices; K13 is a configurable constant
// and classifications are explicitly relative to it.
struct ScaleFns {
    double K13 = 1.0;

    static void require_domain(double m) {
        if (!(m >= 3.0)) {
            throw std::domain_error("scale functions need m >= 3 (log log m > 0), got " +
                                    std::to_string(m));
        }
    }

    double rho(double m) const {
        require_domain(m);
        const double lm = std::log(m);
        return std::log(lm) / (K13 * std::sqrt(lm));
    }

    double theta(double m) const {
        require_domain(m);
        return std::pow(std::log(m), 2.5);
    }

    double phi(double m) const {
        require_domain(m);
        return std::floor(std::pow(std::log(m), 3.0));
    }
};

struct ScaleValues {
    double rho = 0.0;
    double theta = 0.0;
    double phi = 0.0;
};

inline ScaleValues scale_functions(double m, double K13) {
    const ScaleFns f{K13};
    return {f.rho(m), f.theta(m), f.phi(m)};
}

// Waypoints of `path` at layers 0, n, 2n, ..., the simple skeleton.
// `path` lists the sites (i, x_i) for i = 0..N in order.
template <int D>
Skeleton<D> simple_skeleton(const std::vector<Site<D>>& path, std::int64_t n) {
    if (path.empty()) throw std::invalid_argument("simple_skeleton: empty path");
    const std::int64_t N = path.back().n;
    if (n < 1 || N % n != 0) {
        throw std::invalid_argument("simple_skeleton: block length " + std::to_string(n) +
                                    " does not divide path length " + std::to_string(N));
    }
    Skeleton<D> s;
    s.block_length = n;
    for (const auto& site : path) {
        if (site.n % n == 0) s.waypoints.push_back(site);
    }
    return s;
}

namespace detail {

// Upper bound on the enumeration count: free interior waypoints only.
inline double skeleton_count_bound(int d, std::int64_t n, std::int64_t k) {
    return std::pow(static_cast<double>(2 * n + 1), static_cast<double>(d) *
                                                        static_cast<double>(k - 1));
}

template <int D>
void enumerate_rec(std::int64_t n, std::int64_t k, const Coord<D>& endpoint,
                   std::vector<Site<D>>& prefix, std::vector<Skeleton<D>>& out) {
    const std::size_t j = prefix.size(); // next waypoint index
    if (j == static_cast<std::size_t>(k) + 1) {
        Skeleton<D> s;
        s.block_length = n;
        s.waypoints = prefix;
        out.push_back(std::move(s));
        return;
    }
    const Site<D> last = prefix.back(); // copy: push_back below may reallocate
    const std::int64_t layer = static_cast<std::int64_t>(j) * n;
    if (j == static_cast<std::size_t>(k)) {
        // Final waypoint is pinned to the endpoint.
        if (reachable<D>(n, coord_sub<D>(endpoint, last.x))) {
            prefix.push_back(Site<D>{layer, endpoint});
            enumerate_rec<D>(n, k, endpoint, prefix, out);
            prefix.pop_back();
        }
        return;
    }
    // Interior waypoint: any x reachable from the previous waypoint that can
    // still reach the endpoint in the remaining blocks.
    const std::int64_t remaining = (k - static_cast<std::int64_t>(j)) * n;
    const LayerIndex<D> box(n);
    for (std::size_t i = 0; i < box.size(); ++i) {
        const Coord<D> x = coord_add<D>(last.x, box.coord_at(i));
        if (!reachable<D>(remaining, coord_sub<D>(endpoint, x))) continue;
        prefix.push_back(Site<D>{layer, x});
        enumerate_rec<D>(n, k, endpoint, prefix, out);
        prefix.pop_back();
    }
}

} // namespace detail

// All simple skeletons of k blocks of length n from (0,0) to (kn, endpoint).
// The count never exceeds (2n)^{dk}; enumeration refuses above `cap`.
template <int D>
std::vector<Skeleton<D>> enumerate_skeletons(std::int64_t n, std::int64_t k,
                                             const Coord<D>& endpoint,
                                             double cap = 1e6) {
    if (n < 1 || k < 1) throw std::invalid_argument("enumerate_skeletons: need n, k >= 1");
    const double bound = detail::skeleton_count_bound(D, n, k);
    if (bound > cap) {
        throw CapExceeded("enumerate_skeletons: waypoint bound " + std::to_string(bound) +
                          " exceeds cap " + std::to_string(cap));
    }
    std::vector<Skeleton<D>> out;
    if (!reachable<D>(k * n, endpoint)) return out;
    std::vector<Site<D>> prefix{Site<D>{}};
    detail::enumerate_rec<D>(n, k, endpoint, prefix, out);
    return out;
}

// |LSE over skeletons of log Z(S)  -  log Z_{N}(endpoint)|: the skeletons
// partition the constrained path space, so this is 0 up to roundoff.
template <int D>
double decomposition_check(const Environment<D>& env, const PolymerParams& p, std::int64_t n,
                           const Coord<D>& endpoint = Coord<D>{}, double cap = 1e6) {
    validate(p);
    if (n < 1 || p.N % n != 0) {
        throw std::invalid_argument("decomposition_check: block length must divide N");
    }
    const std::int64_t k = p.N / n;
    const auto skels = enumerate_skeletons<D>(n, k, endpoint, cap);
    std::vector<double> parts;
    parts.reserve(skels.size());
    for (const auto& s : skels) {
        parts.push_back(log_partition_skeleton<D>(env, p, s));
    }
    const double total = logsumexp(std::span<const double>(parts));
    const double direct = log_partition_p2p<D>(env, p, endpoint);
    if (total == kNegInf && direct == kNegInf) return 0.0;
    return std::fabs(total - direct);
}

// Inefficiency surface at block length n: for each reachable transverse
// increment x, s_hat(n,x) = n*p_hat - mean_r log Z_{n,omega_r}(x).
// One DP per replica yields the whole layer at once. p_hat is a plug-in
// (lower-biased) estimate of the free energy, so s_hat is biased up.
template <int D>
struct SMap {
    std::int64_t n = 0;
    double beta = 0.0;
    double p_hat = 0.0;
    std::int64_t replicas = 0;
    struct Entry {
        Coord<D> x{};
        double s_hat = 0.0;
        double stderr_of_mean = 0.0;
    };
    std::vector<Entry> entries; // LayerIndex order
};

template <int D>
SMap<D> s_map(const DisorderModel& model, std::int64_t n, double beta, std::int64_t R,
              double p_hat, std::uint64_t base_seed, int threads = 1) {
    if (n < 3) throw std::invalid_argument("s_map: n must be >= 3");
    if (R < 2) throw std::invalid_argument("s_map: need R >= 2 replicas");
    const LayerIndex<D> idx(n);
    const PolymerParams params{n, beta};
    std::vector<std::vector<double>> per_replica(static_cast<std::size_t>(R));
    parallel_for(R, threads, [&](std::int64_t r) {
        const Environment<D> env(model, base_seed, r);
        per_replica[static_cast<std::size_t>(r)] = log_partition_field<D>(env, params).values();
    });
    SMap<D> out;
    out.n = n;
    out.beta = beta;
    out.p_hat = p_hat;
    out.replicas = R;
    out.entries.resize(idx.size());
    std::vector<double> col(static_cast<std::size_t>(R));
    for (std::size_t i = 0; i < idx.size(); ++i) {
        for (std::size_t r = 0; r < static_cast<std::size_t>(R); ++r) {
            col[r] = per_replica[r][i];
        }
        const auto mv = mean_var(col);
        out.entries[i] = {idx.coord_at(i), static_cast<double>(n) * p_hat - mv.mean,
                          mv.stderr_of_mean};
    }
    return out;
}

// Adequate iff s_hat <= sqrt(n) theta(n); efficient iff s_hat <= 4 sqrt(n)
// rho(n). Both thresholds are expressed in the designated block length n,
// which defaults to the map's own block length but may be passed separately
// (efficiency is defined for general increments (m, x) with thresholds
// still in n). h_n = max |x|_inf over adequate increments, u_n =
// 2*floor(h_n / (2 phi(n))) clamped to >= 2 (a zero coarse-graining scale
// is meaningless at desk scale; the clamp is flagged).
template <int D>
struct Classification {
    double adequate_threshold = 0.0;
    double efficient_threshold = 0.0;
    std::vector<Coord<D>> adequate_set;
    std::vector<Coord<D>> efficient_set;
    std::int64_t h_n = 0;
    std::int64_t u_n = 2;
    bool u_n_clamped = false;
};

template <int D>
Classification<D> classify(const SMap<D>& smap, const ScaleFns& scale,
                           std::int64_t threshold_n = 0) {
    if (smap.entries.empty()) throw std::invalid_argument("classify: empty s-map");
    const double m = static_cast<double>(threshold_n > 0 ? threshold_n : smap.n);
    Classification<D> c;
    c.adequate_threshold = std::sqrt(m) * scale.theta(m);
    c.efficient_threshold = 4.0 * std::sqrt(m) * scale.rho(m);
    std::int64_t h = -1;
    for (const auto& e : smap.entries) {
        if (e.s_hat <= c.adequate_threshold) {
            c.adequate_set.push_back(e.x);
            h = std::max(h, linf_norm<D>(e.x));
        }
        if (e.s_hat <= c.efficient_threshold) {
            c.efficient_set.push_back(e.x);
        }
    }
    c.h_n = std::max<std::int64_t>(h, 0);
    const double phi = scale.phi(m);
    std::int64_t u = 2 * static_cast<std::int64_t>(
                             std::floor(static_cast<double>(c.h_n) / (2.0 * phi)));
    if (u < 2) {
        u = 2;
        c.u_n_clamped = true;
    }
    c.u_n = u;
    return c;
}

} // namespace polymerlab
