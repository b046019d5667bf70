// Counter-based deterministic random number generation.
//
// Every disorder value in the toolkit is a pure function of a key chain
// (base_seed, replica_index, layer, coordinates...): hashing the chain with
// SplitMix64 gives O(1) access to any single coordinate, so resampling one
// site never touches the others and no field is ever stored.

#pragma once

#include <cstdint>

namespace polymerlab {

// SplitMix64 finalizer (Steele, Lea, Flood). Full-avalanche 64-bit mix.
inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Sequential chain: each word is mixed into the running state. Chaining
// (rather than xor-folding) keeps distinct key tuples from colliding when
// individual words happen to cancel.
inline constexpr std::uint64_t hash_chain(std::uint64_t h, std::uint64_t v) noexcept {
    return splitmix64(h ^ v);
}

// Signed lattice coordinates are zigzag-encoded before hashing so that
// small negative and positive values map to distinct small words.
inline constexpr std::uint64_t zigzag(std::int64_t v) noexcept {
    return (static_cast<std::uint64_t>(v) << 1) ^ static_cast<std::uint64_t>(v >> 63);
}

// 53-bit mantissa convention: u = (2*(bits >> 12) + 1) * 2^-53, the odd
// multiples of 2^-53. Every value is exactly representable, strictly inside
// (0,1) (min 2^-53, max 1 - 2^-53), and symmetric about 1/2, so quantile
// transforms never see 0 or 1 and independent implementations reproduce
// draws bit-for-bit.
inline constexpr double u01_from_bits(std::uint64_t bits) noexcept {
    return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

// Stateful counter stream for places that need a sequence of draws from one
// key (transport sampling, condition sweeps). Draw i is splitmix64(key + i),
// i.e. the canonical SplitMix64 sequence seeded at `key`.
class CounterStream {
public:
    explicit CounterStream(std::uint64_t key) noexcept : state_(key) {}

    std::uint64_t next_bits() noexcept { return splitmix64(state_++); }
    double next_u01() noexcept { return u01_from_bits(next_bits()); }

private:
    std::uint64_t state_;
};

} // namespace polymerlab
