#include "orchestra/random.h"

namespace orchestra {
namespace {

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t Fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::uint64_t DeriveSeed(std::uint64_t seed, std::string_view stream,
                         std::uint64_t index) {
  std::uint64_t h = SplitMix64(seed);
  h = SplitMix64(h ^ Fnv1a(stream));
  return SplitMix64(h ^ SplitMix64(index));
}

}  // namespace orchestra
