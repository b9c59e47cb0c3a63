#pragma once

#include <cstdint>
#include <random>

#include "photocount/core.hpp"

namespace photocount {

using Rng = std::mt19937_64;

/// Independent generator for substream `stream` of a master seed. The
/// mapping depends only on (seed, stream), so results do not depend on how
/// streams are scheduled across threads.
inline Rng make_substream(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                      0x9e3779b9u};
    return Rng(seq);
}

/// Circularly symmetric complex Gaussian with E|z|^2 = 1.
inline Complex standard_complex_normal(Rng& rng) {
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
    const double re = normal(rng);
    const double im = normal(rng);
    return {re, im};
}

}  // namespace photocount
