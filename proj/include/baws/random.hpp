#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <limits>

namespace baws {

/// SplitMix64 step; used for seeding and for hashing stream keys.
inline std::uint64_t splitmix64(std::uint64_t& state) noexcept {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// xoshiro256** (Blackman & Vigna). Satisfies UniformRandomBitGenerator.
///
/// Chosen over std::mt19937_64 because the bootstrap derives one fresh stream per
/// (seed, t, i, b) tuple, and seeding must cost a handful of operations rather than
/// a 312-word state fill.
class Xoshiro256 {
public:
    using result_type = std::uint64_t;

    explicit Xoshiro256(std::uint64_t seed) noexcept {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64(sm);
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> state_{};
};

/// Hash an ordered tuple of integers into one 64-bit seed.
inline std::uint64_t mix_key(std::initializer_list<std::uint64_t> keys) noexcept {
    std::uint64_t h = 0x6a09e667f3bcc909ULL;
    for (std::uint64_t k : keys) {
        std::uint64_t s = h ^ k;
        h = splitmix64(s);
    }
    return h;
}

inline Xoshiro256 derive_stream(std::initializer_list<std::uint64_t> keys) noexcept {
    return Xoshiro256(mix_key(keys));
}

/// Uniform integer in [0, n) by multiply-shift; bias is below n / 2^64.
template <class Rng>
inline std::size_t uniform_index(Rng& rng, std::size_t n) noexcept {
    return static_cast<std::size_t>((static_cast<unsigned __int128>(rng()) * n) >> 64);
}

/// Uniform double in [0, 1) from the top 53 bits.
template <class Rng>
inline double uniform01(Rng& rng) noexcept {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace baws
