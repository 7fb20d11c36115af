#include "quench/rng.hpp"

#include <cmath>
#include <numbers>

namespace quench {

double RandomStream::normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t probability_threshold(double p) {
    if (!(p > 0.0)) return 0;
    if (p >= 1.0) return std::numeric_limits<std::uint64_t>::max();
    const double scaled = std::ldexp(p, 64);
    if (scaled >= 0x1.0p64) return std::numeric_limits<std::uint64_t>::max();
    return static_cast<std::uint64_t>(scaled);
}

}  // namespace quench
