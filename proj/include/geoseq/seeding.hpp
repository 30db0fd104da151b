#pragma once

#include <cstdint>
#include <string_view>

#include "geoseq/features.hpp"

namespace geoseq {

// SplitMix64 finalizer.
constexpr std::uint64_t mix_seed(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Named sub-stream of a run seed ("dataset", "rollout", "init", ...).
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream) {
  return mix_seed(seed ^ fnv1a64(stream));
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return mix_seed(mix_seed(seed ^ mix_seed(a)) ^ b);
}

}  // namespace geoseq
