#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace autotuner {

// Seeded generator with bit-stable distributions. The standard
// distributions are implementation-defined, which would break
// byte-identical corpus rebuilds across toolchains, so the few
// draws we need are spelled out here.
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    uint64_t next_u64() {
        uint64_t hi = engine_();
        uint64_t lo = engine_();
        return (hi << 32) | lo;
    }

    // Uniform on [0, 1).
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal via Box-Muller; one value per call, no caching,
    // so the stream is independent of call interleaving.
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    double normal(double mean, double stddev) {
        return mean + stddev * normal();
    }

    // Uniform integer in [0, n).
    uint64_t below(uint64_t n) {
        // Rejection-free modulo bias is negligible for our n (< 2^32),
        // but reject anyway to keep the stream well defined.
        uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t x = next_u64();
        while (x >= limit) x = next_u64();
        return x % n;
    }

private:
    std::mt19937 engine_;
};

}  // namespace autotuner
