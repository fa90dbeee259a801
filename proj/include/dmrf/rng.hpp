#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

namespace dmrf {

// SplitMix64 finalizer. Scrambles a 64-bit word; used to derive independent
// stream seeds from (master seed, stream id) tuples.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t id) {
    return mix64(mix64(master) ^ (id + 0x9e3779b97f4a7c15ULL));
}

template <class... Rest>
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t id, Rest... rest) {
    return derive_seed(derive_seed(master, id), rest...);
}

// Stream ids for derive_seed so distinct consumers never collide.
namespace stream {
inline constexpr std::uint64_t tree = 0x7265e5;
inline constexpr std::uint64_t fold = 0xf01d;
inline constexpr std::uint64_t tie = 0x7a1e;
inline constexpr std::uint64_t test_set = 0x7e57;
inline constexpr std::uint64_t train_pool = 0x7a00;
}  // namespace stream

/// Seeded random stream. Wraps mt19937_64 but draws every distribution
/// through hand-rolled, implementation-independent transforms so that a seed
/// produces the same sequence on every platform and standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(mix64(seed)) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1), 53-bit resolution.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, n); unbiased bitmask rejection.
    std::size_t uniform_below(std::size_t n) {
        assert(n > 0);
        if (n == 1) return 0;
        std::uint64_t mask = n - 1;
        mask |= mask >> 1;
        mask |= mask >> 2;
        mask |= mask >> 4;
        mask |= mask >> 8;
        mask |= mask >> 16;
        mask |= mask >> 32;
        std::uint64_t x;
        do {
            x = next_u64() & mask;
        } while (x >= n);
        return x;
    }

    bool bernoulli(double p) { return uniform01() < p; }

    /// Knuth's product method; fine for the small means used here.
    int poisson(double mean) {
        assert(mean > 0.0);
        const double limit = std::exp(-mean);
        int k = 0;
        double prod = uniform01();
        while (prod > limit) {
            ++k;
            prod *= uniform01();
        }
        return k;
    }

    /// Box-Muller; the sine partner is discarded to keep the stream stateless.
    double normal(double mean, double stddev) {
        const double u1 = 1.0 - uniform01();  // (0, 1]
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        return mean + stddev * r * std::cos(2.0 * std::numbers::pi * u2);
    }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[uniform_below(i)]);
        }
    }

    /// k distinct values from [0, n), partial Fisher-Yates. Order is random.
    std::vector<std::uint32_t> sample_without_replacement(std::uint32_t n, std::uint32_t k) {
        assert(k <= n);
        std::vector<std::uint32_t> pool(n);
        for (std::uint32_t i = 0; i < n; ++i) pool[i] = i;
        for (std::uint32_t i = 0; i < k; ++i) {
            const std::size_t j = i + uniform_below(n - i);
            std::swap(pool[i], pool[j]);
        }
        pool.resize(k);
        return pool;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace dmrf
