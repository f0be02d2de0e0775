#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace qwb {

/// Counter-based pseudo-random stream (splitmix64). A stream is fully
/// determined by its seed, and independent streams are derived from
/// (seed, task ids), so results do not depend on thread scheduling as long as
/// every task owns its own stream.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    /// Hash-combines one id into a stream seed.
    static std::uint64_t mix(std::uint64_t h, std::uint64_t id) {
        h ^= id + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
        h = (h ^ (h >> 30)) * 0xBF58476D1CE4E5B9ull;
        h = (h ^ (h >> 27)) * 0x94D049BB133111EBull;
        return h ^ (h >> 31);
    }

    /// Derives the seed of an independent sub-stream from a base seed and a
    /// list of task ids.
    static std::uint64_t derive(std::uint64_t seed, std::initializer_list<std::uint64_t> ids) {
        std::uint64_t h = mix(seed, 0x716B6F6F64627572ull);
        for (std::uint64_t id : ids) h = mix(h, id);
        return h;
    }

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n). n must be >= 1.
    std::uint64_t uniform_int(std::uint64_t n) { return next_u64() % n; }

    bool bernoulli(double p) { return uniform() < p; }

    /// Standard normal via Box-Muller; consumes two uniforms per call.
    double normal() {
        double u1 = 1.0 - uniform(); // (0, 1]
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
    }

private:
    std::uint64_t state_;
};

} // namespace qwb
