#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>

namespace chartret {

/// Seeded generator with portable draws. std::mt19937_64 output is fixed by
/// the standard but the std distributions are not, so uniforms and normals
/// are derived from raw engine output here.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Seed from the first 8 bytes (little-endian) of a digest.
    static Rng from_digest(std::span<const std::uint8_t> digest) {
        std::uint64_t seed = 0;
        for (std::size_t i = 0; i < 8 && i < digest.size(); ++i) {
            seed |= std::uint64_t{digest[i]} << (8 * i);
        }
        return Rng(seed);
    }

    std::uint64_t next() { return engine_(); }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). Slight modulo bias is irrelevant at our n.
    std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : engine_() % n; }

    bool chance(double p) { return uniform() < p; }

    /// Standard normal via Box-Muller; the cosine branch only.
    double normal() {
        const double u1 = 1.0 - uniform(); // (0, 1]
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

private:
    std::mt19937_64 engine_;
};

} // namespace chartret
