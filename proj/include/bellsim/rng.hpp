// Counter-based random number generation (Philox4x32-10).
//
// Salmon et al., "Parallel random numbers: as easy as 1, 2, 3", SC 2011.
// Every random draw is a pure function of (seed, stream, index, draw), so a
// simulation partitioned across any number of workers produces the same
// numbers as a serial run.
#pragma once

#include <cstdint>

namespace bellsim {

struct Philox4x32Ctr {
    std::uint32_t c0 = 0, c1 = 0, c2 = 0, c3 = 0;
};

struct Philox4x32Key {
    std::uint32_t k0 = 0, k1 = 0;
};

namespace detail {

inline void philox_round(Philox4x32Ctr& c, const Philox4x32Key& k) noexcept {
    const std::uint64_t m0 = std::uint64_t{0xD2511F53u} * c.c0;
    const std::uint64_t m1 = std::uint64_t{0xCD9E8D57u} * c.c2;
    const auto lo0 = static_cast<std::uint32_t>(m0);
    const auto hi0 = static_cast<std::uint32_t>(m0 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(m1);
    const auto hi1 = static_cast<std::uint32_t>(m1 >> 32);
    c = {hi1 ^ c.c1 ^ k.k0, lo1, hi0 ^ c.c3 ^ k.k1, lo0};
}

}  // namespace detail

// One 10-round Philox4x32 block. Matches the Random123 reference outputs.
inline Philox4x32Ctr philox4x32(Philox4x32Ctr ctr, Philox4x32Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
        detail::philox_round(ctr, key);
        key.k0 += 0x9E3779B9u;
        key.k1 += 0xBB67AE85u;
    }
    return ctr;
}

// Stateless per-stream generator. `stream` separates independent uses of one
// seed (e.g. the four setting pairs of a run); `index` is the trial counter;
// `draw` distinguishes the random decisions inside one trial. Skipping a
// draw id never shifts any other draw.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint32_t stream) noexcept
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          stream_(stream) {}

    std::uint64_t bits(std::uint64_t index, std::uint32_t draw) const noexcept {
        const Philox4x32Ctr out = philox4x32(
            {static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
             stream_, draw},
            key_);
        return (std::uint64_t{out.c0} << 32) | out.c1;
    }

    // Uniform double in [0, 1), 53 random bits.
    double uniform(std::uint64_t index, std::uint32_t draw) const noexcept {
        return static_cast<double>(bits(index, draw) >> 11) * 0x1.0p-53;
    }

private:
    Philox4x32Key key_;
    std::uint32_t stream_;
};

// Stream ids. Setting pairs occupy 0..3 (the SettingPair value); other
// experiments get their own streams so reusing a seed across commands never
// correlates draws.
inline constexpr std::uint32_t stream_coin = 4;
inline constexpr std::uint32_t stream_selection = 5;

}  // namespace bellsim
