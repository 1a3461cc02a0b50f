#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "scscl/errors.hpp"

namespace scscl {

/// Deterministic, platform-stable generator (splitmix64). Single-owner:
/// never share one instance across concurrent tasks.
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1) with 53 bits of precision.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) {
        if (!(lo < hi)) throw ConfigError("uniform: lo must be < hi");
        return lo + (hi - lo) * next_unit();
    }

    double log_uniform(double lo, double hi) {
        if (!(lo > 0.0 && lo < hi)) throw ConfigError("log_uniform: need 0 < lo < hi");
        return std::exp(uniform(std::log(lo), std::log(hi)));
    }

    /// Standard normal via Box-Muller (two fresh uniforms per draw, no caching).
    double gaussian() {
        double u1 = next_unit();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        double u2 = next_unit();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    /// Uniform integer in [0, n). n must be > 0.
    std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

    /// Derive an independent stream for a sub-task (fold, trial, ...).
    static std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
        SeededRng r(master ^ (0xA5A5A5A5DEADBEEFULL + stream * 0x9E3779B97F4A7C15ULL));
        return r.next_u64();
    }

private:
    std::uint64_t state_;
};

/// Fisher-Yates shuffle with the library RNG (std::shuffle is not portable
/// across standard library implementations).
template <typename T>
void shuffle(std::vector<T>& v, SeededRng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng.next_below(i));
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace scscl
