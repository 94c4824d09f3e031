#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace sgemas {

// splitmix64 finalizer, used to derive independent sub-seeds from a base seed
// plus integer salts. Stable across platforms and runs.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt_a,
                                 std::uint64_t salt_b = 0) {
    return splitmix64(splitmix64(base ^ salt_a) + salt_b);
}

// Deterministic random source. mt19937_64 is fully specified by the standard;
// the uniform and gaussian transforms below are implemented here instead of
// using std::*_distribution, whose output is implementation-defined. This
// keeps traces byte-identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : eng_(seed) {}

    void reseed(std::uint64_t seed) {
        eng_.seed(seed);
        has_spare_ = false;
        spare_ = 0.0;
    }

    // Uniform in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    // Standard normal via polar Box-Muller (pairs cached).
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform01() - 1.0;
            v = 2.0 * uniform01() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        has_spare_ = true;
        return u * m;
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

private:
    std::mt19937_64 eng_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace sgemas
