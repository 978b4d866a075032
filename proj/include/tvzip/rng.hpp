#pragma once

#include <cstdint>
#include <random>

namespace tvzip {

/// splitmix64 output function. Used both to scramble user seeds and to derive
/// independent stream seeds, so replication j of a study can draw from
/// stream_seed(base, j) without overlapping any other replication.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Counter-based stream derivation: the seed for stream `index` is the
/// splitmix64 output at state base + index * gamma. Distinct indices give
/// decorrelated 64-bit seeds even for small consecutive bases.
inline std::uint64_t stream_seed(std::uint64_t base, std::uint64_t index) {
    std::uint64_t state = base + index * 0x9E3779B97F4A7C15ull;
    return splitmix64(state);
}

/// Deterministic random source: a mersenne-twister engine seeded through
/// splitmix64. uniform01 uses the top 53 bits directly so the draw protocol
/// is fully specified; normal and poisson delegate to the standard library
/// distributions (deterministic for a given build).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(scramble(seed)) {}

    /// Uniform draw in [0, 1).
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double normal() { return normal_(engine_); }

    long poisson(double mean) {
        return poisson_(engine_, std::poisson_distribution<long>::param_type(mean));
    }

private:
    static std::uint64_t scramble(std::uint64_t seed) {
        std::uint64_t state = seed;
        return splitmix64(state);
    }

    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::poisson_distribution<long> poisson_{1.0};
};

}  // namespace tvzip
