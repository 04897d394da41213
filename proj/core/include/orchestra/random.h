#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace orchestra {

using Rng = std::mt19937_64;

// Named-stream seed splitter. Every consumer of randomness derives its own
// engine from (root seed, stream name, index), so adding a draw in one
// stream never shifts the values seen by another.
std::uint64_t DeriveSeed(std::uint64_t seed, std::string_view stream,
                         std::uint64_t index = 0);

inline Rng MakeRng(std::uint64_t seed, std::string_view stream,
                   std::uint64_t index = 0) {
  return Rng(DeriveSeed(seed, stream, index));
}

// Uniform double in [0, 1).
inline double Uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline bool Bernoulli(Rng& rng, double p) { return Uniform01(rng) < p; }

// Uniform integer in [0, n).
inline std::size_t UniformIndex(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

}  // namespace orchestra
