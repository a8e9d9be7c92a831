#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace sparsecv {

// Counter-based random numbers: every draw is a pure function of
// (seed, stream, i, j), so any entry can be regenerated on its own.

enum class Stream : std::uint64_t {
  kDesign = 1,
  kTheta = 2,
  kNoise = 3,
  kLabel = 4,
  kSubsample = 5,
  kLissa = 6,
  kRowSample = 7,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t counter_bits(std::uint64_t seed, Stream stream, std::uint64_t i,
                                  std::uint64_t j) {
  std::uint64_t h = splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(stream)));
  h = splitmix64(h ^ splitmix64(i + 0x632BE59BD9B4E019ULL));
  return splitmix64(h ^ splitmix64(j + 0x85157AF5ULL * 0x2545F4914F6CDD1DULL));
}

/// Uniform on [0, 1).
inline double counter_uniform(std::uint64_t seed, Stream stream, std::uint64_t i,
                              std::uint64_t j) {
  return static_cast<double>(counter_bits(seed, stream, i, j) >> 11) * 0x1.0p-53;
}

/// Standard normal via Box-Muller on two independent counters.
inline double counter_normal(std::uint64_t seed, Stream stream, std::uint64_t i,
                             std::uint64_t j) {
  const std::uint64_t a = counter_bits(seed, stream, i, 2 * j);
  const std::uint64_t b = counter_bits(seed, stream, i, 2 * j + 1);
  const double u1 = static_cast<double>((a >> 11) + 1) * 0x1.0p-53;  // (0, 1]
  const double u2 = static_cast<double>(b >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace sparsecv
