#pragma once

#include <cstdint>
#include <limits>

namespace relaywait {

/// SplitMix64 finalizer. Used to turn (seed, counter) pairs into
/// well-separated generator states.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// xoshiro256** (Blackman & Vigna). Small state, cheap to construct, so one
/// engine per renewal cycle is affordable. Satisfies UniformRandomBitGenerator.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed) noexcept
    {
        std::uint64_t x = seed;
        for (auto& word : s_) {
            x += 0x9e3779b97f4a7c15ULL;
            word = mix64(x);
        }
    }

    /// Independent stream for (seed, index). Depends only on the pair, never on
    /// the order in which streams are created.
    static Rng stream(std::uint64_t seed, std::uint64_t index) noexcept
    {
        return Rng(mix64(mix64(seed) + 0x632be59bd9b4e019ULL * (index + 1)));
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept
    {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    friend bool operator==(const Rng&, const Rng&) = default;

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept
    {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t s_[4]{};
};

/// Uniform variate on (0, 1]; never returns 0 so that log(u) is finite.
template <class URBG>
double uniform_open_closed(URBG& gen)
{
    static_assert(URBG::max() - URBG::min() == std::numeric_limits<std::uint64_t>::max(),
                  "expects a full 64-bit generator");
    const std::uint64_t bits = (gen() - URBG::min()) >> 11;
    return static_cast<double>(bits + 1) * 0x1.0p-53;
}

}  // namespace relaywait
