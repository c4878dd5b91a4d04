#ifndef RSMERTON_RNG_HPP
#define RSMERTON_RNG_HPP

#include <cmath>
#include <cstdint>

namespace rsm {

// splitmix64 finalizer
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Counter-based stream generator: the sequence is a pure function of
/// (seed, stream), so path k of a Monte Carlo run draws from stream k and is
/// reproducible no matter how paths are distributed across workers.
class PathRng {
public:
    PathRng(std::uint64_t seed, std::uint64_t stream)
        : state_(mix64(mix64(seed) ^ mix64(stream ^ 0xDA942042E4DD58B5ULL))) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // uniform on [0, 1)
    double next_uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform on (0, 1]
    double next_uniform_pos() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    double next_exponential(double rate) { return -std::log(next_uniform_pos()) / rate; }

    // standard normal via Box-Muller; the pair partner is cached
    double next_normal() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        const double u1 = next_uniform_pos();
        const double u2 = next_uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 6.283185307179586476925286766559 * u2;
        cached_ = radius * std::sin(angle);
        has_cached_ = true;
        return radius * std::cos(angle);
    }

private:
    std::uint64_t state_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace rsm

#endif
