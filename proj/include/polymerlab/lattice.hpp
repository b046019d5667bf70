// Space-time lattice for nearest-neighbor directed walks: sites (n, x) on
// the even sublattice {n + x_1 + ... + x_d even}, reachable when |x|_1 <= n.
//
// Dimension is a template parameter (the toolkit supports D = 1 and 2).
// For D = 2 the layer-n reachable set is indexed through rotated
// coordinates u = (x1+x2+n)/2, v = (x1-x2+n)/2, both in [0, n]: the l1 ball
// with parity is exactly an (n+1) x (n+1) square there, and every walk step
// changes u and v by +-1 each.

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <string>

namespace polymerlab {

template <int D>
using Coord = std::array<std::int64_t, static_cast<std::size_t>(D)>;

template <int D>
struct Site {
    std::int64_t n = 0;
    Coord<D> x{};

    friend bool operator==(const Site&, const Site&) = default;
    friend auto operator<=>(const Site&, const Site&) = default;
};

template <int D>
inline std::int64_t l1_norm(const Coord<D>& x) noexcept {
    std::int64_t s = 0;
    for (int i = 0; i < D; ++i) s += std::llabs(x[static_cast<std::size_t>(i)]);
    return s;
}

template <int D>
inline std::int64_t linf_norm(const Coord<D>& x) noexcept {
    std::int64_t s = 0;
    for (int i = 0; i < D; ++i) {
        const std::int64_t a = std::llabs(x[static_cast<std::size_t>(i)]);
        if (a > s) s = a;
    }
    return s;
}

template <int D>
inline Coord<D> coord_add(const Coord<D>& a, const Coord<D>& b) noexcept {
    Coord<D> r{};
    for (int i = 0; i < D; ++i) {
        const auto k = static_cast<std::size_t>(i);
        r[k] = a[k] + b[k];
    }
    return r;
}

template <int D>
inline Coord<D> coord_sub(const Coord<D>& a, const Coord<D>& b) noexcept {
    Coord<D> r{};
    for (int i = 0; i < D; ++i) {
        const auto k = static_cast<std::size_t>(i);
        r[k] = a[k] - b[k];
    }
    return r;
}

// Even-sublattice membership: n + sum(x) even.
template <int D>
inline bool parity_ok(std::int64_t n, const Coord<D>& x) noexcept {
    std::int64_t s = n;
    for (int i = 0; i < D; ++i) s += x[static_cast<std::size_t>(i)];
    return (s & 1) == 0;
}

// A displacement x is reachable in n steps iff |x|_1 <= n and parity matches.
template <int D>
inline bool reachable(std::int64_t n, const Coord<D>& x) noexcept {
    return n >= 0 && l1_norm<D>(x) <= n && parity_ok<D>(n, x);
}

template <int D>
inline bool site_valid(const Site<D>& s) noexcept {
    return reachable<D>(s.n, s.x);
}

// Flat indexing of the layer-n reachable set.
//   D=1: x = -n + 2i, i in [0, n]                -> n+1 cells
//   D=2: (u, v) in [0, n]^2 (rotated coords)     -> (n+1)^2 cells
template <int D>
struct LayerIndex;

template <>
struct LayerIndex<1> {
    std::int64_t n;

    explicit LayerIndex(std::int64_t layer) noexcept : n(layer) {}
    std::size_t size() const noexcept { return static_cast<std::size_t>(n + 1); }

    bool contains(const Coord<1>& x) const noexcept { return reachable<1>(n, x); }

    std::size_t index_of(const Coord<1>& x) const noexcept {
        return static_cast<std::size_t>((x[0] + n) >> 1);
    }

    Coord<1> coord_at(std::size_t i) const noexcept {
        return {-n + 2 * static_cast<std::int64_t>(i)};
    }
};

template <>
struct LayerIndex<2> {
    std::int64_t n;

    explicit LayerIndex(std::int64_t layer) noexcept : n(layer) {}
    std::size_t size() const noexcept {
        return static_cast<std::size_t>((n + 1) * (n + 1));
    }

    bool contains(const Coord<2>& x) const noexcept { return reachable<2>(n, x); }

    std::size_t index_of(const Coord<2>& x) const noexcept {
        const std::int64_t u = (x[0] + x[1] + n) >> 1;
        const std::int64_t v = (x[0] - x[1] + n) >> 1;
        return static_cast<std::size_t>(u * (n + 1) + v);
    }

    Coord<2> coord_at(std::size_t i) const noexcept {
        const std::int64_t u = static_cast<std::int64_t>(i) / (n + 1);
        const std::int64_t v = static_cast<std::int64_t>(i) % (n + 1);
        return {u + v - n, u - v};
    }
};

// The 2d unit steps of the walk.
template <int D>
inline std::array<Coord<D>, 2 * D> walk_steps() noexcept {
    std::array<Coord<D>, 2 * D> steps{};
    for (int i = 0; i < D; ++i) {
        steps[static_cast<std::size_t>(2 * i)][static_cast<std::size_t>(i)] = 1;
        steps[static_cast<std::size_t>(2 * i + 1)][static_cast<std::size_t>(i)] = -1;
    }
    return steps;
}

template <int D>
inline std::string coord_to_string(const Coord<D>& x) {
    std::string s = "(";
    for (int i = 0; i < D; ++i) {
        if (i) s += ",";
        s += std::to_string(x[static_cast<std::size_t>(i)]);
    }
    s += ")";
    return s;
}

} // namespace polymerlab
