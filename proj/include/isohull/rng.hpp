#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <span>
#include <vector>

namespace isohull {

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t avalanche(std::uint64_t z) noexcept
{
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Mixes a master seed with an ordered label path. The result depends on the
/// order of the labels, so (s, [1, 2]) and (s, [2, 1]) name different streams.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::span<const std::uint64_t> labels) noexcept
{
    std::uint64_t h = avalanche(master);
    for (std::uint64_t label : labels) {
        h = avalanche(h ^ (avalanche(label) + 0x632BE59BD9B4E019ULL));
    }
    return h;
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> labels) noexcept
{
    return derive_seed(master, std::span<const std::uint64_t>(labels.begin(), labels.size()));
}

/// xoshiro256** generator seeded through SplitMix64, with Box-Muller normals.
///
/// A stream is a value type; copying it forks an identical sequence. Streams
/// are not meant to be shared between threads: give every task its own stream
/// built from derive_seed.
class RngStream
{
public:
    using result_type = std::uint64_t;

    explicit RngStream(std::uint64_t seed) noexcept : seed_(seed)
    {
        std::uint64_t x = seed;
        for (auto& word : state_) {
            word = avalanche(x);
            x += 0x9E3779B97F4A7C15ULL;
        }
        // all-zero state is a fixed point of xoshiro
        if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) {
            state_[0] = 1;
        }
    }

    /// Stream for (master, labels), the only sanctioned way to fork work.
    static RngStream derived(std::uint64_t master, std::initializer_list<std::uint64_t> labels) noexcept
    {
        return RngStream(derive_seed(master, labels));
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return ~result_type{0}; }

    result_type operator()() noexcept { return next(); }

    std::uint64_t next() noexcept
    {
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

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1].
    double uniform_open_zero() noexcept { return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53; }

    /// Standard normal via the Box-Muller transform; the second variate of each
    /// pair is cached.
    double normal() noexcept
    {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform_open_zero();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double phi = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(phi);
        has_spare_ = true;
        return r * std::cos(phi);
    }

    /// Exp(1) variate.
    double exponential() noexcept { return -std::log(uniform_open_zero()); }

    std::uint64_t seed() const noexcept { return seed_; }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

    std::array<std::uint64_t, 4> state_{};
    std::uint64_t seed_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace isohull
