#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace greenspread {

/// Finalizer of the SplitMix64 generator. Bijective on 64-bit integers.
inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Derives an independent sub-seed from (seed, stream). Used for the
/// generation stages of a network and for the (cell, replicate) seeds of a
/// sweep, so that each consumer gets its own decorrelated stream.
inline constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept
{
    return splitmix64(splitmix64(seed) ^ splitmix64(stream * 0x9E3779B97F4A7C15ull + 0xD1B54A32D192ED03ull));
}

inline constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t s1, std::uint64_t s2) noexcept
{
    return mix_seed(mix_seed(seed, s1), s2);
}

/// Deterministic random source. Wraps std::mt19937_64 (bit-exact across
/// platforms by the standard) and supplies its own variate conversions,
/// since the std::*_distribution adapters are implementation-defined and
/// would break cross-platform reproducibility.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform() < p; }

    /// Uniform integer in [0, n). Unbiased via rejection. n must be > 0.
    std::uint64_t uniform_below(std::uint64_t n)
    {
        constexpr std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
        // reject draws from the incomplete top interval of size (2^64 mod n)
        const std::uint64_t overhang = (max % n + 1) % n;
        std::uint64_t x = gen_();
        if (overhang != 0) {
            while (x > max - overhang)
                x = gen_();
        }
        return x % n;
    }

private:
    std::mt19937_64 gen_;
};

} // namespace greenspread
