#include "qtmrl/rng.hpp"

namespace qtmrl {

std::uint64_t Rng::uniform_int(std::uint64_t bound) {
    if (bound == 0) throw Error("bad-config", "uniform_int bound must be >= 1");
    // Rejection below the largest multiple of bound.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % bound;
}

std::size_t Rng::categorical(std::span<const double> probs) {
    double total = 0.0;
    for (double p : probs) {
        if (p < 0.0 || !std::isfinite(p)) {
            throw Error("bad-config", "categorical probabilities must be finite and nonnegative");
        }
        total += p;
    }
    if (total <= 0.0) throw Error("bad-config", "categorical distribution has zero mass");

    const double u = uniform() * total;
    double cum = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        cum += probs[i];
        if (u < cum) return i;
    }
    // Rounding can leave u == total; return the last positive-mass index.
    for (std::size_t i = probs.size(); i-- > 0;) {
        if (probs[i] > 0.0) return i;
    }
    return probs.size() - 1;
}

}  // namespace qtmrl
