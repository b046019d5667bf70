// Exact log-space transfer-matrix engine for the directed polymer.
//
// All partition-function variants reduce to one forward recursion over
// layers: W_m(x) = beta*omega(m, x) - log(2d) + LSE over predecessors of
// W_{m-1}. Point-to-line is the LSE of the last layer, point-to-point is a
// single cell, skeleton constraints mask intermediate layers, shifts move
// the origin. Everything is exact up to floating-point roundoff; -inf marks
// empty constrained path sets.
//
// A brute-force path enumerator (capped at 1e7 paths) serves as the
// independent oracle for all of the above.

#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "polymerlab/environment.hpp"
#include "polymerlab/errors.hpp"
#include "polymerlab/lattice.hpp"
#include "polymerlab/logsumexp.hpp"

namespace polymerlab {

struct PolymerParams {
    std::int64_t N = 1; // path length (steps); dimension is the template parameter
    double beta = 0.0;  // inverse temperature, >= 0 (0 gives the free walk)
};

inline void validate(const PolymerParams& p) {
    if (p.N < 1) throw std::invalid_argument("PolymerParams: N must be >= 1");
    if (!(p.beta >= 0.0)) throw std::invalid_argument("PolymerParams: beta must be >= 0");
}

// Per-layer map (displacement from the walk origin) -> log weight, stored
// flat in LayerIndex order.
template <int D>
class LogZField {
public:
    LogZField(std::int64_t layer, std::vector<double> values)
        : layer_(layer), values_(std::move(values)) {}

    std::int64_t layer() const noexcept { return layer_; }
    std::size_t size() const noexcept { return values_.size(); }
    const std::vector<double>& values() const noexcept { return values_; }

    double at(const Coord<D>& x) const noexcept {
        const LayerIndex<D> idx(layer_);
        if (!idx.contains(x)) return kNegInf;
        return values_[idx.index_of(x)];
    }

    Coord<D> coord_at(std::size_t i) const noexcept {
        return LayerIndex<D>(layer_).coord_at(i);
    }

    double logsumexp() const noexcept {
        return ::polymerlab::logsumexp(std::span<const double>(values_));
    }

private:
    std::int64_t layer_;
    std::vector<double> values_;
};

// Simple skeleton: waypoints at layers 0, n, 2n, ..., kn (absolute sites,
// first waypoint is the walk origin).
template <int D>
struct Skeleton {
    std::int64_t block_length = 1;
    std::vector<Site<D>> waypoints;
};

template <int D>
inline bool skeleton_feasible(const Skeleton<D>& s) noexcept {
    for (std::size_t j = 1; j < s.waypoints.size(); ++j) {
        const auto d = coord_sub<D>(s.waypoints[j].x, s.waypoints[j - 1].x);
        const auto dn = s.waypoints[j].n - s.waypoints[j - 1].n;
        if (!reachable<D>(dn, d)) return false;
    }
    return true;
}

namespace detail {

constexpr double kLog2d(int D) noexcept { return D == 1 ? 0.6931471805599453 : 1.3862943611198906; }

// One forward step: fill layer m (relative to origin) from layer m-1.
template <int D>
void forward_step(const Environment<D>& env, const Site<D>& origin, double beta,
                  std::int64_t m, const std::vector<double>& prev, std::vector<double>& cur);

template <>
inline void forward_step<1>(const Environment<1>& env, const Site<1>& origin, double beta,
                            std::int64_t m, const std::vector<double>& prev,
                            std::vector<double>& cur) {
    const std::int64_t nAbs = origin.n + m;
    cur.resize(static_cast<std::size_t>(m + 1));
    for (std::int64_t i = 0; i <= m; ++i) {
        const double a = (i >= 1) ? prev[static_cast<std::size_t>(i - 1)] : kNegInf;
        const double b = (i <= m - 1) ? prev[static_cast<std::size_t>(i)] : kNegInf;
        const double lse = lse2(a, b);
        if (lse == kNegInf) {
            cur[static_cast<std::size_t>(i)] = kNegInf;
            continue;
        }
        const std::int64_t x = origin.x[0] + (-m + 2 * i);
        cur[static_cast<std::size_t>(i)] =
            beta * env.omega(nAbs, Coord<1>{x}) - kLog2d(1) + lse;
    }
}

template <>
inline void forward_step<2>(const Environment<2>& env, const Site<2>& origin, double beta,
                            std::int64_t m, const std::vector<double>& prev,
                            std::vector<double>& cur) {
    const std::int64_t nAbs = origin.n + m;
    cur.resize(static_cast<std::size_t>((m + 1) * (m + 1)));
    // Rotated coordinates: predecessors of (u,v) are (u-1|u, v-1|v) in [0,m-1]^2.
    for (std::int64_t u = 0; u <= m; ++u) {
        const std::int64_t uLo = (u > 0) ? u - 1 : 0;
        const std::int64_t uHi = (u < m) ? u : m - 1;
        for (std::int64_t v = 0; v <= m; ++v) {
            const std::int64_t vLo = (v > 0) ? v - 1 : 0;
            const std::int64_t vHi = (v < m) ? v : m - 1;
            double mx = kNegInf;
            for (std::int64_t uu = uLo; uu <= uHi; ++uu)
                for (std::int64_t vv = vLo; vv <= vHi; ++vv) {
                    const double w = prev[static_cast<std::size_t>(uu * m + vv)];
                    if (w > mx) mx = w;
                }
            double out = kNegInf;
            if (mx != kNegInf) {
                double s = 0.0;
                for (std::int64_t uu = uLo; uu <= uHi; ++uu)
                    for (std::int64_t vv = vLo; vv <= vHi; ++vv)
                        s += std::exp(prev[static_cast<std::size_t>(uu * m + vv)] - mx);
                const Coord<2> x{origin.x[0] + (u + v - m), origin.x[1] + (u - v)};
                out = beta * env.omega(nAbs, x) - kLog2d(2) + mx + std::log(s);
            }
            cur[static_cast<std::size_t>(u * (m + 1) + v)] = out;
        }
    }
}

// Mask every cell of layer `m` except the displacement `keep`.
template <int D>
inline void mask_layer(std::int64_t m, const Coord<D>& keep, std::vector<double>& layer) {
    const LayerIndex<D> idx(m);
    if (!idx.contains(keep)) {
        std::fill(layer.begin(), layer.end(), kNegInf);
        return;
    }
    const std::size_t k = idx.index_of(keep);
    for (std::size_t i = 0; i < layer.size(); ++i) {
        if (i != k) layer[i] = kNegInf;
    }
}

} // namespace detail

// Forward field after `length` steps from `origin`. If `skel` is given, its
// waypoints (which must start at `origin`) constrain the matching layers.
template <int D>
LogZField<D> forward_field(const Environment<D>& env, const Site<D>& origin,
                           std::int64_t length, double beta,
                           const Skeleton<D>* skel = nullptr) {
    if (length < 1) throw std::invalid_argument("forward_field: length must be >= 1");
    std::vector<double> prev{0.0}; // layer 0: all mass at the origin
    std::vector<double> cur;
    for (std::int64_t m = 1; m <= length; ++m) {
        detail::forward_step<D>(env, origin, beta, m, prev, cur);
        if (skel != nullptr && m % skel->block_length == 0) {
            const std::size_t j = static_cast<std::size_t>(m / skel->block_length);
            if (j < skel->waypoints.size()) {
                detail::mask_layer<D>(m, coord_sub<D>(skel->waypoints[j].x, origin.x), cur);
            }
        }
        prev.swap(cur);
    }
    return LogZField<D>(length, std::move(prev));
}

// log Z_{N,omega}: point-to-line partition function, Gibbs normalizer.
template <int D>
double log_partition(const Environment<D>& env, const PolymerParams& p) {
    validate(p);
    return forward_field<D>(env, Site<D>{}, p.N, p.beta).logsumexp();
}

// log Z_{N,omega}(z): paths constrained to end at z; -inf iff unreachable.
template <int D>
double log_partition_p2p(const Environment<D>& env, const PolymerParams& p, const Coord<D>& z) {
    validate(p);
    if (!reachable<D>(p.N, z)) return kNegInf;
    return forward_field<D>(env, Site<D>{}, p.N, p.beta).at(z);
}

// Full endpoint field (one DP yields every z at once).
template <int D>
LogZField<D> log_partition_field(const Environment<D>& env, const PolymerParams& p) {
    validate(p);
    return forward_field<D>(env, Site<D>{}, p.N, p.beta);
}

// Partition function of length N in the environment translated by `origin`.
template <int D>
double log_partition_shifted(const Environment<D>& env, const PolymerParams& p,
                             const Site<D>& origin) {
    validate(p);
    return forward_field<D>(env, origin, p.N, p.beta).logsumexp();
}

// log Z((l,x) -> (m,y)): walk started at `start`, constrained to hit `end`.
template <int D>
double log_partition_between(const Environment<D>& env, const Site<D>& start,
                             const Site<D>& end, double beta) {
    if (start.n >= end.n) {
        throw std::invalid_argument("log_partition_between: start layer " +
                                    std::to_string(start.n) + " must precede end layer " +
                                    std::to_string(end.n));
    }
    const auto len = end.n - start.n;
    const auto disp = coord_sub<D>(end.x, start.x);
    if (!reachable<D>(len, disp)) return kNegInf;
    return forward_field<D>(env, start, len, beta).at(disp);
}

// log Z_{N,omega}(S): paths through every waypoint of the skeleton. Equals
// the sum of the block partition functions exactly (Markov factorization).
template <int D>
double log_partition_skeleton(const Environment<D>& env, const PolymerParams& p,
                              const Skeleton<D>& skel) {
    validate(p);
    if (skel.waypoints.empty()) throw std::invalid_argument("skeleton has no waypoints");
    if (skel.block_length < 1 || p.N % skel.block_length != 0) {
        throw std::invalid_argument("skeleton block length must divide N");
    }
    if (skel.waypoints.back().n != p.N) {
        throw std::invalid_argument("skeleton must terminate at layer N");
    }
    if (!skeleton_feasible(skel)) return kNegInf;
    const auto field = forward_field<D>(env, skel.waypoints.front(), p.N, p.beta, &skel);
    return field.at(coord_sub<D>(skel.waypoints.back().x, skel.waypoints.front().x));
}

// Gibbs endpoint law mu_{N,omega}(x_N = z) over the reachable layer-N set.
template <int D>
std::map<Coord<D>, double> endpoint_distribution(const Environment<D>& env,
                                                 const PolymerParams& p) {
    const auto field = log_partition_field<D>(env, p);
    const double logZ = field.logsumexp();
    std::map<Coord<D>, double> out;
    for (std::size_t i = 0; i < field.size(); ++i) {
        out[field.coord_at(i)] = std::exp(field.values()[i] - logZ);
    }
    return out;
}

// Occupation field: mu_{N,omega}((m,y) in gamma) for 1 <= m <= N.
// Layer sums are 1, the grand total is N, and beta times each entry equals
// the omega-derivative of log Z at that site.
template <int D>
class OccupationField {
public:
    OccupationField(std::int64_t N, std::vector<std::vector<double>> layers, double log_z)
        : N_(N), layers_(std::move(layers)), log_z_(log_z) {}

    std::int64_t path_length() const noexcept { return N_; }
    double log_partition() const noexcept { return log_z_; }

    double at(std::int64_t m, const Coord<D>& x) const noexcept {
        if (m < 1 || m > N_) return 0.0;
        const LayerIndex<D> idx(m);
        if (!idx.contains(x)) return 0.0;
        return layers_[static_cast<std::size_t>(m - 1)][idx.index_of(x)];
    }

    const std::vector<double>& layer(std::int64_t m) const {
        return layers_.at(static_cast<std::size_t>(m - 1));
    }

    double layer_sum(std::int64_t m) const {
        const auto& l = layer(m);
        double s = 0.0;
        for (const double p : l) s += p;
        return s;
    }

    double total() const {
        double s = 0.0;
        for (std::int64_t m = 1; m <= N_; ++m) s += layer_sum(m);
        return s;
    }

private:
    std::int64_t N_;
    std::vector<std::vector<double>> layers_;
    double log_z_;
};

template <int D>
OccupationField<D> occupation_probabilities(const Environment<D>& env, const PolymerParams& p) {
    validate(p);
    const Site<D> origin{};
    const auto steps = walk_steps<D>();

    // Forward pass, all layers kept.
    std::vector<std::vector<double>> fwd(static_cast<std::size_t>(p.N + 1));
    fwd[0] = {0.0};
    for (std::int64_t m = 1; m <= p.N; ++m) {
        detail::forward_step<D>(env, origin, p.beta, m,
                                fwd[static_cast<std::size_t>(m - 1)],
                                fwd[static_cast<std::size_t>(m)]);
    }
    const double logZ =
        logsumexp(std::span<const double>(fwd[static_cast<std::size_t>(p.N)]));

    // Backward pass: B_N = 0; B_m(x) = LSE_s [beta*omega(m+1, x+s) + B_{m+1}(x+s)] - log 2d.
    std::vector<std::vector<double>> layers(static_cast<std::size_t>(p.N));
    std::vector<double> bwd(LayerIndex<D>(p.N).size(), 0.0);
    std::vector<double> bprev;
    for (std::int64_t m = p.N; m >= 1; --m) {
        const LayerIndex<D> idx(m);
        auto& occ = layers[static_cast<std::size_t>(m - 1)];
        occ.resize(idx.size());
        const auto& w = fwd[static_cast<std::size_t>(m)];
        for (std::size_t i = 0; i < idx.size(); ++i) {
            occ[i] = (w[i] == kNegInf) ? 0.0 : std::exp(w[i] + bwd[i] - logZ);
        }
        if (m == 1) break;
        const LayerIndex<D> pidx(m - 1);
        bprev.assign(pidx.size(), kNegInf);
        for (std::size_t i = 0; i < pidx.size(); ++i) {
            const Coord<D> x = pidx.coord_at(i);
            double mx = kNegInf;
            std::array<double, 2 * D> vals;
            for (std::size_t s = 0; s < steps.size(); ++s) {
                const Coord<D> y = coord_add<D>(x, steps[s]);
                double t = kNegInf;
                if (idx.contains(y)) {
                    const std::size_t j = idx.index_of(y);
                    if (bwd[j] != kNegInf) {
                        t = p.beta * env.omega(m, y) + bwd[j];
                    }
                }
                vals[s] = t;
                if (t > mx) mx = t;
            }
            if (mx == kNegInf) continue;
            double sum = 0.0;
            for (const double t : vals) sum += std::exp(t - mx);
            bprev[i] = mx + std::log(sum) - detail::kLog2d(D);
        }
        bwd.swap(bprev);
    }
    return OccupationField<D>(p.N, std::move(layers), logZ);
}

// Brute-force oracle: exact enumeration over all (2d)^N paths, optionally
// endpoint- or skeleton-constrained. Independent of the DP code path.
template <int D>
double brute_force_log_partition(const Environment<D>& env, const PolymerParams& p,
                                 const std::optional<Coord<D>>& endpoint = std::nullopt,
                                 const Skeleton<D>* skel = nullptr) {
    validate(p);
    const double npaths = std::pow(2.0 * D, static_cast<double>(p.N));
    if (npaths > 1e7) {
        throw CapExceeded("brute_force_log_partition: (2d)^N = " + std::to_string(npaths) +
                          " exceeds the 1e7 path cap");
    }
    const auto steps = walk_steps<D>();
    const double logStep = -detail::kLog2d(D);

    double maxLw = kNegInf;
    double sumExp = 0.0;
    bool summing = false;

    auto admissible_end = [&](const Coord<D>& x) {
        return !endpoint || *endpoint == x;
    };
    auto waypoint_ok = [&](std::int64_t m, const Coord<D>& x) {
        if (skel == nullptr || m % skel->block_length != 0) return true;
        const std::size_t j = static_cast<std::size_t>(m / skel->block_length);
        if (j >= skel->waypoints.size()) return true;
        return skel->waypoints[j].x == x;
    };

    // DFS carrying the running log-weight; two passes (max, then sum).
    auto dfs = [&](auto&& self, std::int64_t m, const Coord<D>& x, double lw) -> void {
        if (m == p.N) {
            if (!admissible_end(x)) return;
            if (!summing) {
                if (lw > maxLw) maxLw = lw;
            } else {
                sumExp += std::exp(lw - maxLw);
            }
            return;
        }
        for (const auto& s : steps) {
            const Coord<D> y = coord_add<D>(x, s);
            if (!waypoint_ok(m + 1, y)) continue;
            self(self, m + 1, y, lw + logStep + p.beta * env.omega(m + 1, y));
        }
    };

    dfs(dfs, 0, Coord<D>{}, 0.0);
    if (maxLw == kNegInf) return kNegInf;
    summing = true;
    dfs(dfs, 0, Coord<D>{}, 0.0);
    return maxLw + std::log(sumExp);
}

} // namespace polymerlab
