#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "qtmrl/core.hpp"

namespace qtmrl {

/// Seeded generator with hand-rolled distributions. std::mt19937_64 is
/// fully specified by the standard; the distribution helpers below avoid
/// std::*_distribution, whose output is implementation-defined, so draw
/// sequences are identical across platforms and compilers.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1), 53-bit resolution.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, bound), bound >= 1. Rejection sampling,
    /// no modulo bias.
    std::uint64_t uniform_int(std::uint64_t bound);

    /// Standard normal via Box-Muller (one value per call, no caching,
    /// so the draw count stays predictable).
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    /// Inverse-CDF draw from a discrete distribution. probs must be
    /// nonnegative with positive total mass.
    std::size_t categorical(std::span<const double> probs);

private:
    std::mt19937_64 engine_;
};

}  // namespace qtmrl
