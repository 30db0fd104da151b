#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace geoseq {

inline constexpr std::uint32_t kDefaultBuckets = 4096;

// 64-bit FNV-1a. Stable across platforms; the bucket layout of saved models depends on it.
std::uint64_t fnv1a64(std::string_view text);

// Sparse binary query representation: hashed byte trigrams of the lowercased
// query plus one bucket for the whole query. Sorted and deduplicated.
struct QueryFeatures {
  std::vector<std::uint32_t> ids;
  std::uint32_t buckets = kDefaultBuckets;

  friend bool operator==(const QueryFeatures&, const QueryFeatures&) = default;
};

QueryFeatures featurize(std::string_view query, std::uint32_t buckets = kDefaultBuckets);

}  // namespace geoseq
