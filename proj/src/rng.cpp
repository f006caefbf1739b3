#include "ideajudge/rng.hpp"

#include <cmath>
#include <numbers>

namespace ideajudge {

std::uint64_t StableRng::below(std::uint64_t bound) {
  // Rejection keeps the result unbiased: values under `threshold` would map
  // onto the low residues one extra time.
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    std::uint64_t r = next();
    if (r >= threshold) return r % bound;
  }
}

double StableRng::gaussian() {
  double u1 = 0.0;
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace ideajudge
