#ifndef SLHJB_RNG_HPP
#define SLHJB_RNG_HPP

/// Splittable counter-based random numbers: each path gets an independent
/// substream keyed by (seed, path index), so parallel simulation is
/// reproducible regardless of scheduling. Gaussians come from the inverse
/// normal CDF for platform-stable values and clean antithetic pairing.

#include <cstdint>

namespace slhjb {

/// splitmix64 step; the standard finalizer-based 64-bit stream.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class PathRng {
public:
    PathRng(std::uint64_t seed, std::uint64_t path) {
        // decorrelate the (seed, path) key through two finalizer rounds
        std::uint64_t s = seed ^ 0x5851f42d4c957f2dULL;
        (void)splitmix64(s);
        s ^= path * 0xda942042e4dd58b5ULL;
        (void)splitmix64(s);
        state_ = s;
    }

    std::uint64_t next_u64() { return splitmix64(state_); }

    /// Uniform in (0, 1), never exactly 0 or 1.
    double next_uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    double next_gaussian();

private:
    std::uint64_t state_;
};

/// Inverse standard normal CDF (Wichura's AS241 double-precision rational
/// approximation, accurate to ~1e-16 relative).
double normal_inv_cdf(double p);

}  // namespace slhjb

#endif  // SLHJB_RNG_HPP
