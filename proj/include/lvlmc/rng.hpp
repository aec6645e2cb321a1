#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace lvlmc {

/// splitmix64 step; used both as a stream-key mixer and to expand seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// xoshiro256++ with counter-based construction: every random stream is a
/// pure function of the key words passed in, so work can be farmed out to
/// any number of threads without changing a single draw.
class Rng {
public:
    explicit Rng(std::uint64_t k0, std::uint64_t k1 = 0, std::uint64_t k2 = 0,
                 std::uint64_t k3 = 0) {
        std::uint64_t mix = 0x6c62272e07bb0142ULL;
        mix ^= splitmix64_of(k0 + 0x01);
        mix ^= splitmix64_of(k1 + 0x9e3779b97f4a7c15ULL);
        mix ^= splitmix64_of(k2 + 0x3c6ef372fe94f82aULL);
        mix ^= splitmix64_of(k3 + 0x78dde6e5fd29f05bULL);
        for (auto& word : state_) word = splitmix64(mix);
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

    /// Uniform on (0, 1): 53-bit mantissa, never exactly 0 or 1.
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via the inverse CDF, so draws do not depend on any
    /// standard-library distribution implementation.
    double normal();

private:
    static std::uint64_t splitmix64_of(std::uint64_t v) {
        std::uint64_t s = v;
        return splitmix64(s);
    }
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> state_{};
};

/// Standard normal CDF.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

/// Standard normal quantile (inverse CDF), accurate to full double precision
/// away from p in {0, 1}; Wichura's AS 241 rational approximations.
double normal_quantile(double p);

inline double Rng::normal() { return normal_quantile(uniform()); }

}  // namespace lvlmc
