#pragma once

#include <cstdint>
#include <limits>
#include <string_view>

namespace recovery {

// SplitMix64 output finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// FNV-1a hash of a stream name, used to key named substreams.
constexpr std::uint64_t tag_hash(std::string_view tag) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : tag) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

constexpr std::uint64_t derive_seed(std::uint64_t seed) noexcept { return seed; }

/// Derive a child seed from a parent seed and a sequence of integer keys.
/// Pure function of its arguments, so substreams keyed by (building id,
/// trajectory index, ...) are reproducible in any evaluation order.
template <class... Keys>
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t key, Keys... keys) noexcept {
    const std::uint64_t next = mix64(seed + 0x9e3779b97f4a7c15ULL * (key + 1) + mix64(key ^ 0x632be59bd9b4e019ULL));
    return derive_seed(next, static_cast<std::uint64_t>(keys)...);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag) noexcept {
    return derive_seed(seed, tag_hash(tag));
}

/// SplitMix64 engine. Satisfies UniformRandomBitGenerator so it works with
/// the <random> distributions. Cheap to construct, which is what keyed
/// per-building and per-trajectory substreams need.
class Rng {
public:
    using result_type = std::uint64_t;

    constexpr explicit Rng(std::uint64_t seed = 0) noexcept : state_(seed) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()() noexcept {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix64(state_);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    constexpr double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    template <class... Keys>
    static constexpr Rng keyed(std::uint64_t seed, Keys... keys) noexcept {
        return Rng(derive_seed(seed, static_cast<std::uint64_t>(keys)...));
    }

private:
    std::uint64_t state_;
};

} // namespace recovery
