// Deterministic random number utilities. Everything is built on
// splitmix64 so that results are reproducible bit-for-bit for a given
// seed regardless of platform or call ordering. Gaussian variates come
// from Box-Muller; indexed (counter-based) access is provided for clock
// jitter so immutable clock states can hand out independent draws.
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>

namespace picosync::detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Hash-combines a seed with a stream/index tag into a fresh 64-bit key.
inline std::uint64_t mix(std::uint64_t seed, std::uint64_t tag) {
    std::uint64_t s = seed ^ (0x9e3779b97f4a7c15ULL + (tag << 6) + (tag >> 2));
    std::uint64_t a = splitmix64(s);
    s ^= tag;
    return a ^ splitmix64(s);
}

inline std::uint64_t mix(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return mix(mix(seed, a), b);
}

// Uniform in (0, 1]; never returns 0 so log() is safe.
inline double u64_to_unit_open(std::uint64_t x) {
    return (static_cast<double>(x >> 11) + 1.0) * 0x1.0p-53;
}

// Sequential generator for bulk draws (noise vectors).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(mix(seed, 0x5eedULL)) {}

    std::uint64_t next_u64() { return splitmix64(state_); }

    double next_unit_open() { return u64_to_unit_open(next_u64()); }

    // Standard normal pair (Box-Muller).
    void next_gauss_pair(double& g0, double& g1) {
        const double u1 = next_unit_open();
        const double u2 = next_unit_open();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        g0 = r * std::cos(a);
        g1 = r * std::sin(a);
    }

    // Circular complex normal with total variance 1 (0.5 per dimension).
    std::complex<double> next_complex_gauss() {
        double g0 = 0.0, g1 = 0.0;
        next_gauss_pair(g0, g1);
        return {g0 * 0.70710678118654752440, g1 * 0.70710678118654752440};
    }

private:
    std::uint64_t state_;
};

// Random-access standard normal keyed by (seed, index): independent of
// any generator state, so draw i can be evaluated in any order.
inline double gauss_at(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t s = mix(seed, index);
    const double u1 = u64_to_unit_open(splitmix64(s));
    const double u2 = u64_to_unit_open(splitmix64(s));
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(6.283185307179586476925286766559 * u2);
}

} // namespace picosync::detail
