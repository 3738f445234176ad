#pragma once

#include <cmath>
#include <cstdint>

namespace ouk {

// Counter-based random streams: every draw is a pure function of
// (seed, stream, index), so results do not depend on how work is
// partitioned across workers.

namespace detail {
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}
}  // namespace detail

inline std::uint64_t counter_word(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  std::uint64_t h = detail::mix64(seed ^ 0x6A09E667F3BCC909ull);
  h = detail::mix64(h ^ (stream * 0xD1342543DE82EF95ull + 0x2545F4914F6CDD1Dull));
  return detail::mix64(h ^ index);
}

/// Uniform in the open interval (0,1); never returns an exact endpoint.
inline double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  return static_cast<double>(counter_word(seed, stream, index) >> 11) * 0x1.0p-53 + 0x1.0p-54;
}

/// One standard normal per index (Box-Muller, cosine branch).
inline double counter_normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  const double u1 = counter_uniform(seed, stream, 2 * index);
  const double u2 = counter_uniform(seed, stream, 2 * index + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
}

/// Convenience handle for a fixed (seed, stream) pair.
struct NormalStream {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  double operator()(std::uint64_t index) const { return counter_normal(seed, stream, index); }
};

}  // namespace ouk
