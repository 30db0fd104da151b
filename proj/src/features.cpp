#include "geoseq/features.hpp"

#include <algorithm>
#include <cctype>
#include <string>

#include "geoseq/errors.hpp"

namespace geoseq {

namespace {

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

QueryFeatures featurize(std::string_view query, std::uint32_t buckets) {
  if (buckets == 0) throw InvalidArgument("bucket count must be positive");
  std::string lower(query);
  for (char& c : lower) {
    const auto u = static_cast<unsigned char>(c);
    if (u < 0x80) c = static_cast<char>(std::tolower(u));
  }

  QueryFeatures out;
  out.buckets = buckets;
  if (lower.size() >= 3) {
    out.ids.reserve(lower.size() - 1);
    for (std::size_t i = 0; i + 3 <= lower.size(); ++i) {
      out.ids.push_back(static_cast<std::uint32_t>(fnv1a64(std::string_view(lower).substr(i, 3)) % buckets));
    }
  }
  // Remixed so the whole-query bucket does not coincide with the trigram
  // bucket of a three-byte query.
  out.ids.push_back(static_cast<std::uint32_t>(mix64(fnv1a64(lower)) % buckets));
  std::sort(out.ids.begin(), out.ids.end());
  out.ids.erase(std::unique(out.ids.begin(), out.ids.end()), out.ids.end());
  return out;
}

}  // namespace geoseq
