#ifndef HAMLEVY_RNG_HPP
#define HAMLEVY_RNG_HPP

#include <array>
#include <cmath>
#include <cstdint>

namespace hamlevy {

// Self-contained generator stack.  The standard <random> distributions are
// implementation-defined, which would break the byte-identical-output
// guarantees the experiment runner makes, so everything here is pinned.

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += kGolden);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// xoshiro256** seeded through splitmix64, as its authors recommend.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t s = seed;
        for (auto& w : state_) w = splitmix64(s);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // uniform on (0,1]: 53-bit mantissa, never returns 0
    double uniform_01() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform_01(); }

    // Box-Muller; caches the second variate
    double normal() {
        if (have_cache_) {
            have_cache_ = false;
            return cache_;
        }
        const double u1 = uniform_01();
        const double u2 = uniform_01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        cache_ = r * std::sin(a);
        have_cache_ = true;
        return r * std::cos(a);
    }

    // Knuth product method, chunked so exp(-mean) never underflows.
    std::uint64_t poisson(double mean) {
        std::uint64_t total = 0;
        while (mean > 256.0) {
            total += poisson_small(256.0);
            mean -= 256.0;
        }
        return total + poisson_small(mean);
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t poisson_small(double mean) {
        if (mean <= 0.0) return 0;
        const double limit = std::exp(-mean);
        std::uint64_t n = 0;
        double prod = uniform_01();
        while (prod > limit) {
            ++n;
            prod *= uniform_01();
        }
        return n;
    }

    std::array<std::uint64_t, 4> state_{};
    double cache_ = 0.0;
    bool have_cache_ = false;
};

// Stream splitting: replicate index hashed into the root seed state.  Streams
// are independent of worker assignment, so results cannot depend on the
// worker count.
inline Rng make_stream(std::uint64_t root_seed, std::uint64_t stream_index) {
    std::uint64_t s = root_seed ^ (kGolden * (stream_index + 1));
    const std::uint64_t mixed = splitmix64(s);
    return Rng(mixed);
}

}  // namespace hamlevy

#endif
