#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace quench {

// SplitMix64 finalizer; used to derive independent stream keys.
constexpr std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Mixes a list of 64-bit words into one key, order sensitive.
constexpr std::uint64_t hash_words(std::initializer_list<std::uint64_t> words) {
    std::uint64_t state = 0x6A09E667F3BCC909ULL;
    std::uint64_t out = 0;
    for (auto w : words) {
        state ^= w;
        out = splitmix64(state);
        state = out;
    }
    return out;
}

// xoshiro256++ (Blackman & Vigna). Satisfies UniformRandomBitGenerator.
class RandomStream {
public:
    using result_type = std::uint64_t;

    explicit RandomStream(std::uint64_t key) {
        std::uint64_t sm = key;
        for (auto& w : s_) w = splitmix64(sm);
    }

    // One stream per (master seed, stream index).
    static RandomStream for_stream(std::uint64_t master_seed, std::uint64_t index) {
        return RandomStream(hash_words({master_seed, index}));
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n), Lemire multiply-shift.
    std::uint64_t below(std::uint64_t n) {
        return static_cast<std::uint64_t>((static_cast<unsigned __int128>((*this)()) * n) >> 64);
    }

    // Standard normal via Box-Muller (one value per call).
    double normal();

    friend bool operator==(const RandomStream&, const RandomStream&) = default;

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t s_[4]{};
};

// Threshold t such that P(next() < t) == p, for integer comparison in hot loops.
std::uint64_t probability_threshold(double p);

}  // namespace quench
