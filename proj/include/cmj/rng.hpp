#pragma once

#include <cmath>
#include <cstdint>

namespace cmj {

// 64-bit finalizer from splitmix64; good avalanche, used both for key mixing
// and as the per-stream output function.
inline constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
}

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// Combine a seed with a key into a new 64-bit value. Order-sensitive.
inline constexpr std::uint64_t mix_key(std::uint64_t seed, std::uint64_t key) noexcept {
    return mix64(seed ^ (mix64(key + kGolden) + kGolden));
}

// Counter-based stream: state advances by a fixed odd constant, outputs are
// the mixed counter (splitmix64). Streams for distinct keys are independent
// of traversal order, which is what makes simulations reproducible across
// worker counts.
class RngStream {
public:
    RngStream() = default;
    explicit RngStream(std::uint64_t state) : state_(state) {}
    RngStream(std::uint64_t seed, std::uint64_t key) : state_(mix_key(seed, key)) {}

    std::uint64_t next_u64() noexcept {
        state_ += kGolden;
        return mix64(state_);
    }

    // in [0, 1)
    double uniform01() noexcept {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double a, double b) noexcept { return a + (b - a) * uniform01(); }

    // strictly positive; uses log1p so u == 0 is safe
    double exponential(double rate) noexcept {
        return -std::log1p(-uniform01()) / rate;
    }

    double normal() noexcept {
        for (;;) {
            const double u = 2.0 * uniform01() - 1.0;
            const double v = 2.0 * uniform01() - 1.0;
            const double s = u * u + v * v;
            if (s > 0.0 && s < 1.0)
                return u * std::sqrt(-2.0 * std::log(s) / s);
        }
    }

    // Marsaglia-Tsang; shape boost for k < 1
    double gamma(double shape, double rate) noexcept {
        if (shape < 1.0) {
            const double g = gamma(shape + 1.0, rate);
            const double u = 1.0 - uniform01();  // (0, 1]
            return g * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            const double x = normal();
            const double t = 1.0 + c * x;
            if (t <= 0.0) continue;
            const double v = t * t * t;
            const double u = uniform01();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v / rate;
        }
    }

private:
    std::uint64_t state_ = 0;
};

}  // namespace cmj
