#ifndef FFIRE_RNG_HPP
#define FFIRE_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace ffire {

// Seeded 64-bit generator. The engine is std::mt19937_64 (fully specified by
// the standard, so runs are bit-reproducible for a given seed); per-run
// streams are derived by splitmix64 scrambling of (base seed, stream index).
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    static std::uint64_t splitmix64(std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ull;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
        return x ^ (x >> 31);
    }
    static Rng stream(std::uint64_t base_seed, std::uint64_t index) {
        return Rng(splitmix64(base_seed) ^ splitmix64(index + 0x51ed2701));
    }

    std::uint64_t next_u64() { return eng_(); }

    /// Uniform on [0, 1), 53-bit resolution.
    double uniform() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    /// Exponential waiting time with the given rate.
    double exponential(double rate) {
        return -std::log1p(-uniform()) / rate;
    }

    /// Unbiased uniform integer in [0, m), Lemire's method with rejection.
    std::uint64_t bounded(std::uint64_t m) {
        std::uint64_t x = eng_();
        __uint128_t prod = static_cast<__uint128_t>(x) * m;
        auto lo = static_cast<std::uint64_t>(prod);
        if (lo < m) {
            const std::uint64_t thresh = (-m) % m;
            while (lo < thresh) {
                x = eng_();
                prod = static_cast<__uint128_t>(x) * m;
                lo = static_cast<std::uint64_t>(prod);
            }
        }
        return static_cast<std::uint64_t>(prod >> 64);
    }

  private:
    std::mt19937_64 eng_;
};

}  // namespace ffire

#endif
