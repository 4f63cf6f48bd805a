#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace igd {

/// Derives an independent stream seed from a base seed, a purpose tag and an
/// index. Splitmix64 finalizer; changing one stream's draw count never shifts
/// another stream.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag, std::uint64_t index = 0) {
    std::uint64_t z = base + 0x9E3779B97F4A7C15ull * (tag + 1) + 0xBF58476D1CE4E5B9ull * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Deterministic random stream. Avoids std::uniform_real_distribution and
/// friends, whose output is implementation-defined; all draws here are pure
/// functions of the seed.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Inclusive integer range.
    int uniform_int(int lo, int hi) {
        const int span = hi - lo + 1;
        int v = lo + static_cast<int>(uniform() * span);
        return v > hi ? hi : v;
    }

    /// Standard normal via Box-Muller; two fresh uniforms per call.
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace igd
