#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace subco {

// Portable random source.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the C++
// standard. The standard distributions are implementation-defined, so every
// derived variate below is computed from raw 64-bit draws with an explicit
// formula; a port that reproduces mt19937_64 and these formulas reproduces
// every generated sequence bit for bit.
//
//   uniform()     = (draw >> 11) * 2^-53                      in [0, 1)
//   uniform(a, b) = a + (b - a) * uniform()
//   normal()      = Box-Muller, cosine branch only (one normal per two draws)
//   poisson(l)    = Knuth multiplication method
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        return n == 0 ? 0 : static_cast<std::uint64_t>(uniform() * static_cast<double>(n)) % n;
    }

    bool bernoulli(double p) { return uniform() < p; }

    double normal() {
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    int poisson(double lambda) {
        if (lambda <= 0.0) return 0;
        const double limit = std::exp(-lambda);
        int k = 0;
        double p = uniform();
        while (p > limit) {
            ++k;
            p *= uniform();
        }
        return k;
    }

    /// Derive an independent child stream, e.g. one per sequence.
    static std::uint64_t mix(std::uint64_t seed, std::uint64_t salt) {
        // splitmix64 finalizer
        std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (salt + 1);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace subco
