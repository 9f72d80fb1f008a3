#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace nmla {

// Independent stream seed for a named component of a run.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view label,
                                 std::uint64_t index = 0) {
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
  for (char c : label) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  // splitmix64 finalizer over the combined words.
  std::uint64_t z = seed ^ (h + 0x9e3779b97f4a7c15ULL + (index << 6) + (index >> 2));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed, std::string_view label, std::uint64_t index = 0) {
  return Rng(derive_seed(seed, label, index));
}

}  // namespace nmla
