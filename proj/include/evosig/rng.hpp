#pragma once

#include <cstddef>
#include <cstdint>

namespace evosig {

// SplitMix64 (Steele, Lea, Flood 2014). All engine randomness flows through
// this generator so that runs are reproducible bit-for-bit across platforms
// and across reimplementations:
//   state += 0x9E3779B97F4A7C15
//   z = state
//   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//   return z ^ (z >> 31)
// uniform01() = (next() >> 11) * 2^-53, in [0, 1).

inline constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

class Rng {
public:
    explicit constexpr Rng(std::uint64_t seed = 0) noexcept : state_(seed) {}

    constexpr std::uint64_t next() noexcept {
        state_ += 0x9E3779B97F4A7C15ULL;
        return splitmix64_mix(state_);
    }

    constexpr double uniform01() noexcept {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    /// Uniform index in [0, n). n must be positive.
    constexpr std::size_t index(std::size_t n) noexcept {
        return static_cast<std::size_t>(uniform01() * static_cast<double>(n));
    }

    constexpr std::uint64_t state() const noexcept { return state_; }
    constexpr void set_state(std::uint64_t s) noexcept { state_ = s; }

    friend constexpr bool operator==(const Rng&, const Rng&) = default;

private:
    std::uint64_t state_;
};

} // namespace evosig
