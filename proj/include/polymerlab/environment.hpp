// The quenched disorder field omega_{n,x}: a deterministic function of
// (model, base_seed, replica_index, site), generated on demand by counter
// hashing. No storage, O(1) per-site access, O(1) single-site resampling
// through an immutable override map (value semantics: resampling returns a
// new Environment, the original is untouched).

#pragma once

#include <cstdint>
#include <map>
#include <utility>

#include "polymerlab/disorder.hpp"
#include "polymerlab/lattice.hpp"
#include "polymerlab/rng.hpp"

namespace polymerlab {

namespace detail {

// Domain separation tags so base draws, resample draws and auxiliary
// streams can never collide.
inline constexpr std::uint64_t kTagField = 0x706f6c79666c64ULL;    // "polyfld"
inline constexpr std::uint64_t kTagResample = 0x706f6c79727331ULL; // "polyrs1"

template <int D>
inline std::uint64_t site_bits(std::uint64_t key, std::int64_t n, const Coord<D>& x) noexcept {
    std::uint64_t h = hash_chain(key, static_cast<std::uint64_t>(n));
    for (int i = 0; i < D; ++i) {
        h = hash_chain(h, zigzag(x[static_cast<std::size_t>(i)]));
    }
    return h;
}

} // namespace detail

template <int D>
class Environment {
public:
    Environment(DisorderModel model, std::uint64_t base_seed, std::int64_t replica_index)
        : model_(std::move(model)), base_seed_(base_seed), replica_(replica_index) {
        field_key_ = hash_chain(hash_chain(hash_chain(detail::kTagField, base_seed_),
                                           static_cast<std::uint64_t>(replica_)),
                                0);
    }

    const DisorderModel& model() const noexcept { return model_; }
    std::uint64_t base_seed() const noexcept { return base_seed_; }
    std::int64_t replica_index() const noexcept { return replica_; }
    const std::map<Site<D>, double>& overrides() const noexcept { return overrides_; }

    // omega(n, x) for layer n >= 1. Marginal law is model(); overrides win.
    double omega(std::int64_t n, const Coord<D>& x) const {
        if (!overrides_.empty()) {
            const auto it = overrides_.find(Site<D>{n, x});
            if (it != overrides_.end()) return it->second;
        }
        return model_.quantile(u01_from_bits(detail::site_bits<D>(field_key_, n, x)));
    }

    double omega(const Site<D>& s) const { return omega(s.n, s.x); }

    // New environment with `site` pinned to `value`.
    Environment with_override(const Site<D>& site, double value) const {
        Environment e = *this;
        e.overrides_[site] = value;
        return e;
    }

    // New environment in which `site` carries an independent fresh draw
    // keyed by fresh_seed; all other coordinates are unchanged.
    Environment resample_site(const Site<D>& site, std::uint64_t fresh_seed) const {
        std::uint64_t h = hash_chain(detail::kTagResample, fresh_seed);
        h = detail::site_bits<D>(h, site.n, site.x);
        return with_override(site, model_.quantile(u01_from_bits(h)));
    }

    // Key for derived deterministic streams (estimator-internal resampling,
    // probe schedules) tied to this environment's identity.
    std::uint64_t derived_key(std::uint64_t tag) const noexcept {
        return hash_chain(field_key_, tag);
    }

private:
    DisorderModel model_;
    std::uint64_t base_seed_;
    std::int64_t replica_;
    std::uint64_t field_key_;
    std::map<Site<D>, double> overrides_;
};

} // namespace polymerlab
