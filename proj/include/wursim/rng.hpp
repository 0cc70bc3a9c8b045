// Deterministic random streams for reproducible Monte Carlo runs.
//
// Every episode owns an independent RandomStream derived from
// (base_seed, config_index, episode_index) through an avalanche mixer,
// so results are bit-identical regardless of thread count or platform
// (no std::distribution types, whose output is library-dependent).
#pragma once

#include <cmath>
#include <cstdint>

namespace wursim {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// xoshiro256++ stream, state expanded from a 64-bit seed via splitmix64.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) {
        for (auto& word : state_) word = splitmix64(seed);
        if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1), 53-bit resolution.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform01() < p; }

    /// Standard normal draw via Box-Muller; consumes exactly two uniforms.
    double gaussian() {
        double u1 = uniform01();
        const double u2 = uniform01();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t state_[4];
};

/// Avalanche-mixes the (base_seed, config_index, episode_index) tuple into
/// one stream seed. Distinct tuples give distinct, uncorrelated streams.
inline std::uint64_t derive_stream_seed(std::uint64_t base_seed,
                                        std::uint64_t config_index,
                                        std::uint64_t episode_index) {
    std::uint64_t s = base_seed;
    (void)splitmix64(s);
    s ^= 0xD1B54A32D192ED03ull * (config_index + 1);
    (void)splitmix64(s);
    s ^= 0x8CB92BA72F3D8DD7ull * (episode_index + 1);
    return splitmix64(s);
}

} // namespace wursim
