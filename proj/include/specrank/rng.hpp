#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace specrank {

namespace detail {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

// splitmix64 output finalizer; full-avalanche bijection on 64 bits.
inline constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace detail

// Derives an independent stream seed from (seed, stream). Used to give every
// bootstrap draw / Monte Carlo replication its own counter-based stream, so
// results do not depend on how work is scheduled across threads.
inline constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return detail::mix64(detail::mix64(seed + detail::kGolden) ^
                         (detail::mix64(stream + 0x632be59bd9b4e019ULL) + detail::kGolden));
}

inline constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return derive_seed(derive_seed(seed, a), b);
}

// splitmix64 generator with a Doornik-style 128-layer ziggurat for normals.
// Deterministic given its seed on a fixed build; no global state.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += detail::kGolden);
        return detail::mix64(z);
    }

    // Uniform on [0,1), 53-bit resolution.
    double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform on (0,1); safe under log().
    double uniform_pos() { return (double(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

    // Unbiased integer in [0, n), Lemire's multiply-reject.
    std::uint32_t below(std::uint32_t n) {
        std::uint32_t x = std::uint32_t(next_u64() >> 32);
        std::uint64_t m = std::uint64_t(x) * n;
        auto lo = std::uint32_t(m);
        if (lo < n) {
            const std::uint32_t t = std::uint32_t(-n) % n;
            while (lo < t) {
                x = std::uint32_t(next_u64() >> 32);
                m = std::uint64_t(x) * n;
                lo = std::uint32_t(m);
            }
        }
        return std::uint32_t(m >> 32);
    }

    // Standard normal draw (ziggurat; exact tail via Marsaglia's method).
    double normal() {
        const ZigTables& zt = zig_tables();
        for (;;) {
            const std::uint64_t bits = next_u64();
            const double u = 2.0 * (double(bits >> 11) * 0x1.0p-53) - 1.0; // [-1,1)
            const unsigned i = unsigned(bits & 127u);
            if (std::fabs(u) < zt.ratio[i]) return u * zt.x[i];
            if (i == 0) return normal_tail(u < 0.0);
            const double xx = u * zt.x[i];
            const double f0 = std::exp(-0.5 * (zt.x[i] * zt.x[i] - xx * xx));
            const double f1 = std::exp(-0.5 * (zt.x[i + 1] * zt.x[i + 1] - xx * xx));
            if (f1 + uniform() * (f0 - f1) < 1.0) return xx;
        }
    }

private:
    static constexpr int kZigLayers = 128;
    static constexpr double kZigR = 3.442619855899;           // rightmost layer edge
    static constexpr double kZigV = 9.91256303526217e-3;      // per-layer area

    struct ZigTables {
        std::array<double, kZigLayers + 1> x{};
        std::array<double, kZigLayers> ratio{};
        ZigTables() {
            const double f = std::exp(-0.5 * kZigR * kZigR);
            x[0] = kZigV / f;
            x[1] = kZigR;
            x[kZigLayers] = 0.0;
            for (int i = 2; i < kZigLayers; ++i) {
                x[i] = std::sqrt(-2.0 * std::log(kZigV / x[i - 1] +
                                                 std::exp(-0.5 * x[i - 1] * x[i - 1])));
            }
            for (int i = 0; i < kZigLayers; ++i) ratio[i] = x[i + 1] / x[i];
        }
    };

    static const ZigTables& zig_tables() {
        static const ZigTables t;
        return t;
    }

    double normal_tail(bool negative) {
        double x, y;
        do {
            x = std::log(uniform_pos()) / kZigR;
            y = std::log(uniform_pos());
        } while (-2.0 * y < x * x);
        return negative ? x - kZigR : kZigR - x;
    }

    std::uint64_t state_;
};

} // namespace specrank
